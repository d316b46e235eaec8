//! Set-valued objectives `X → G(R^d, C)`, their scalarizations
//! `φ_{f,z*}(x) = inf_{z ∈ f(x)} z*·z`, and inf-/sup-translations by a
//! candidate set.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cone::{Cone, DualBase, TOL_GEOM};
use crate::error::{Error, Result};
use crate::gset::{lattice_inf, lattice_sup_2d, ExtReal, GValue};
use crate::linalg::{add, dist_inf, dot, Point};

/// Points closer than this (sup-norm, relative to unit scale) are the same
/// grid point.
pub const GRID_TOL: f64 = 1e-9;

/// Default number of random convex combinations used to sample `co M`.
pub const DEFAULT_CO_SAMPLES: usize = 64;

/// Above this many pairs only consecutive midpoints are sampled.
pub const PAIRWISE_MIDPOINT_CAP: usize = 20_000;

/// The variable space: a continuous box or an explicit finite grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VarSpace {
    Box { lower: Point, upper: Point },
    Grid(Vec<Point>),
}

impl VarSpace {
    pub fn new_box(lower: Point, upper: Point) -> Result<VarSpace> {
        let space = VarSpace::Box { lower, upper };
        space.validate()?;
        Ok(space)
    }

    pub fn new_grid(points: Vec<Point>) -> Result<VarSpace> {
        let space = VarSpace::Grid(points);
        space.validate()?;
        Ok(space)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            VarSpace::Box { lower, upper } => {
                if lower.is_empty() || lower.len() != upper.len() {
                    return Err(Error::InvalidSpace("box bounds must share a positive dimension".into()));
                }
                if lower.iter().zip(upper).any(|(l, u)| l.is_nan() || u.is_nan() || l > u) {
                    return Err(Error::InvalidSpace("box needs lower ≤ upper".into()));
                }
                Ok(())
            }
            VarSpace::Grid(points) => {
                let first = points.first().ok_or_else(|| Error::InvalidSpace("empty grid".into()))?;
                if first.is_empty() || points.iter().any(|p| p.len() != first.len()) {
                    return Err(Error::InvalidSpace("grid points must share a positive dimension".into()));
                }
                for (i, p) in points.iter().enumerate() {
                    if points[..i].iter().any(|q| dist_inf(p, q) <= GRID_TOL) {
                        return Err(Error::InvalidSpace(format!("duplicate grid point {p:?}")));
                    }
                }
                Ok(())
            }
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            VarSpace::Box { lower, .. } => lower.len(),
            VarSpace::Grid(points) => points[0].len(),
        }
    }

    pub fn is_grid(&self) -> bool {
        matches!(self, VarSpace::Grid(_))
    }

    /// Index of the grid point matching `x`.
    pub fn locate(&self, x: &[f64]) -> Option<usize> {
        match self {
            VarSpace::Grid(points) => {
                let tol = GRID_TOL * (1.0 + crate::linalg::norm_inf(x));
                points.iter().position(|p| dist_inf(p, x) <= tol)
            }
            VarSpace::Box { .. } => None,
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        if x.len() != self.dim() {
            return false;
        }
        match self {
            VarSpace::Box { lower, upper } => x.iter().zip(lower.iter().zip(upper)).all(|(v, (l, u))| {
                let slack = 1e-12 * (1.0 + v.abs());
                *v >= l - slack && *v <= u + slack
            }),
            VarSpace::Grid(_) => self.locate(x).is_some(),
        }
    }

    /// Verification probe. A grid is returned whole. A box is sampled with a
    /// seeded, randomly rotated lattice: `res` cell centers per axis when
    /// `dim = 1`, otherwise `res` points of a rotated Halton sequence, plus
    /// the corners and the center.
    pub fn probe(&self, res: usize, seed: u64) -> Vec<Point> {
        match self {
            VarSpace::Grid(points) => points.clone(),
            VarSpace::Box { lower, upper } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x05ee_d0f9_e0be);
                let n = lower.len();
                let res = res.max(1);
                let shift: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
                let mut out: Vec<Point> = Vec::new();
                if n == 1 {
                    for k in 0..res {
                        let u = (k as f64 + shift[0]) / res as f64;
                        out.push(vec![lower[0] + u * (upper[0] - lower[0])]);
                    }
                } else {
                    for k in 0..res {
                        let p = (0..n)
                            .map(|i| {
                                let u = (halton(k + 1, PRIMES[i % PRIMES.len()]) + shift[i]).fract();
                                lower[i] + u * (upper[i] - lower[i])
                            })
                            .collect();
                        out.push(p);
                    }
                }
                out.extend(box_corners(lower, upper));
                out.push(lower.iter().zip(upper).map(|(l, u)| 0.5 * (l + u)).collect());
                out
            }
        }
    }

    /// Seeded uniform points used to start continuous searches.
    pub fn construction_samples(&self, count: usize, seed: u64) -> Vec<Point> {
        match self {
            VarSpace::Grid(points) => points.clone(),
            VarSpace::Box { lower, upper } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut out: Vec<Point> = (0..count)
                    .map(|_| lower.iter().zip(upper).map(|(l, u)| rng.gen_range(*l..=*u)).collect())
                    .collect();
                out.push(lower.iter().zip(upper).map(|(l, u)| 0.5 * (l + u)).collect());
                out
            }
        }
    }

    /// The space of translations `x` for which `x + y` meets this space for
    /// some shift `y`, plus the origin.
    fn translated(&self, shifts: &[Point]) -> VarSpace {
        match self {
            VarSpace::Box { lower, upper } => {
                let n = lower.len();
                let mut lo = vec![f64::INFINITY; n];
                let mut hi = vec![f64::NEG_INFINITY; n];
                for y in shifts {
                    for i in 0..n {
                        lo[i] = lo[i].min(lower[i] - y[i]).min(0.0);
                        hi[i] = hi[i].max(upper[i] - y[i]).max(0.0);
                    }
                }
                VarSpace::Box { lower: lo, upper: hi }
            }
            VarSpace::Grid(points) => {
                let mut out: Vec<Point> = vec![vec![0.0; self.dim()]];
                for g in points {
                    for y in shifts {
                        let x = crate::linalg::sub(g, y);
                        if out.iter().all(|q| dist_inf(q, &x) > GRID_TOL * (1.0 + crate::linalg::norm_inf(&x))) {
                            out.push(x);
                        }
                    }
                }
                VarSpace::Grid(out)
            }
        }
    }
}

const PRIMES: [usize; 10] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29];

fn halton(mut k: usize, base: usize) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while k > 0 {
        f /= base as f64;
        r += f * (k % base) as f64;
        k /= base;
    }
    r
}

fn box_corners(lower: &[f64], upper: &[f64]) -> Vec<Point> {
    let n = lower.len();
    if n > 10 {
        return Vec::new();
    }
    (0..1usize << n)
        .map(|mask| (0..n).map(|i| if mask >> i & 1 == 1 { upper[i] } else { lower[i] }).collect())
        .collect()
}

pub type VectorMap = Arc<dyn Fn(&[f64]) -> Option<Point> + Send + Sync>;
pub type GeneratorMap = Arc<dyn Fn(&[f64]) -> Vec<Point> + Send + Sync>;

/// How values are produced. Evaluators must be pure.
#[derive(Clone)]
pub enum Evaluator {
    /// `x ↦ {F(x)} ⊕ C`, or `∅` where `F(x) = +∞` (`None`).
    VectorInfExtension(VectorMap),
    /// `x ↦ co(P(x)) ⊕ C`.
    FiniteGenerated(GeneratorMap),
    /// One stored value per grid point, aligned with the grid.
    Table(Vec<GValue>),
    /// `x ↦ inf_{y ∈ shifts} f(x + y)`.
    InfTranslation { base: Arc<SetFunction>, shifts: Arc<Vec<Point>> },
    /// `x ↦ sup_{y ∈ shifts} f(x + y)`.
    SupTranslation { base: Arc<SetFunction>, shifts: Arc<Vec<Point>> },
}

impl fmt::Debug for Evaluator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Evaluator::VectorInfExtension(_) => write!(f, "VectorInfExtension"),
            Evaluator::FiniteGenerated(_) => write!(f, "FiniteGenerated"),
            Evaluator::Table(v) => write!(f, "Table({} values)", v.len()),
            Evaluator::InfTranslation { shifts, .. } => write!(f, "InfTranslation({} shifts)", shifts.len()),
            Evaluator::SupTranslation { shifts, .. } => write!(f, "SupTranslation({} shifts)", shifts.len()),
        }
    }
}

/// A set-valued function on a variable space.
#[derive(Debug, Clone)]
pub struct SetFunction {
    space: VarSpace,
    cone: Arc<Cone>,
    evaluator: Evaluator,
}

impl SetFunction {
    pub fn new(space: VarSpace, cone: Arc<Cone>, evaluator: Evaluator) -> Result<SetFunction> {
        space.validate()?;
        if let Evaluator::Table(values) = &evaluator {
            let VarSpace::Grid(points) = &space else {
                return Err(Error::InvalidSpace("a table needs a grid space".into()));
            };
            if values.len() != points.len() {
                return Err(Error::InvalidInput(format!(
                    "table has {} values for {} grid points",
                    values.len(),
                    points.len()
                )));
            }
            if values.iter().any(|v| **v.cone() != *cone) {
                return Err(Error::IncompatibleCone);
            }
        }
        Ok(SetFunction { space, cone, evaluator })
    }

    /// The inf-extension of a vector function `F`, `None` encoding `+∞`.
    pub fn inf_extension<F>(space: VarSpace, cone: Arc<Cone>, map: F) -> Result<SetFunction>
    where
        F: Fn(&[f64]) -> Option<Point> + Send + Sync + 'static,
    {
        SetFunction::new(space, cone, Evaluator::VectorInfExtension(Arc::new(map)))
    }

    pub fn table(points: Vec<Point>, values: Vec<GValue>, cone: Arc<Cone>) -> Result<SetFunction> {
        SetFunction::new(VarSpace::new_grid(points)?, cone, Evaluator::Table(values))
    }

    pub fn space(&self) -> &VarSpace {
        &self.space
    }

    pub fn cone(&self) -> &Arc<Cone> {
        &self.cone
    }

    pub fn evaluator(&self) -> &Evaluator {
        &self.evaluator
    }

    pub fn eval(&self, x: &[f64]) -> Result<GValue> {
        if !self.space.contains(x) {
            return Err(Error::OutOfDomain(x.to_vec()));
        }
        self.eval_inside(x)
    }

    /// `f(x)`, or `∅` when `x` lies outside the variable space.
    pub fn eval_or_empty(&self, x: &[f64]) -> Result<GValue> {
        if self.space.contains(x) {
            self.eval_inside(x)
        } else {
            Ok(GValue::empty(self.cone.clone()))
        }
    }

    fn eval_inside(&self, x: &[f64]) -> Result<GValue> {
        match &self.evaluator {
            Evaluator::VectorInfExtension(map) => match map(x) {
                Some(v) => GValue::point(self.cone.clone(), v),
                None => Ok(GValue::empty(self.cone.clone())),
            },
            Evaluator::FiniteGenerated(map) => GValue::new(self.cone.clone(), map(x)),
            Evaluator::Table(values) => {
                let i = self.space.locate(x).ok_or_else(|| Error::OutOfDomain(x.to_vec()))?;
                Ok(values[i].clone())
            }
            Evaluator::InfTranslation { base, shifts } => {
                let family = shifts.iter().map(|y| base.eval_or_empty(&add(x, y))).collect::<Result<Vec<_>>>()?;
                lattice_inf(&family)
            }
            Evaluator::SupTranslation { base, shifts } => {
                let family = shifts.iter().map(|y| base.eval_or_empty(&add(x, y))).collect::<Result<Vec<_>>>()?;
                lattice_sup_2d(&family)
            }
        }
    }

    /// `φ_{f,z*}(x)`. Requires `z* ∈ C⁺` and `x` in the space.
    pub fn scalarize(&self, z: &[f64], x: &[f64]) -> Result<ExtReal> {
        if !self.cone.dual_contains(z, TOL_GEOM) {
            return Err(Error::InvalidDirection(z.to_vec()));
        }
        if !self.space.contains(x) {
            return Err(Error::OutOfDomain(x.to_vec()));
        }
        self.phi_inside(z, x)
    }

    /// `φ_{f,z*}(x)` with `+∞` outside the space; `z*` must already be known
    /// to lie in `C⁺`.
    pub(crate) fn phi(&self, z: &[f64], x: &[f64]) -> Result<ExtReal> {
        if self.space.contains(x) {
            self.phi_inside(z, x)
        } else {
            Ok(ExtReal::POS_INF)
        }
    }

    fn phi_inside(&self, z: &[f64], x: &[f64]) -> Result<ExtReal> {
        match &self.evaluator {
            Evaluator::VectorInfExtension(map) => Ok(match map(x) {
                Some(v) => ExtReal::new(dot(z, &v)),
                None => ExtReal::POS_INF,
            }),
            _ => self.eval_inside(x)?.support(z),
        }
    }

    /// The inf-translation `x ↦ inf_{y ∈ M} f(x + y)`. Points `x + y` outside
    /// the space contribute `∅`. The result lives on the translations for
    /// which some `x + y` meets the space.
    pub fn inf_translate(&self, m: &CandidateSet) -> Result<SetFunction> {
        let shifts = m.shifts();
        self.check_shifts(&shifts)?;
        Ok(SetFunction {
            space: self.space.translated(&shifts),
            cone: self.cone.clone(),
            evaluator: Evaluator::InfTranslation { base: Arc::new(self.clone()), shifts: Arc::new(shifts) },
        })
    }

    /// The sup-translation `x ↦ sup_{y ∈ M} f(x + y)` in `(G, ⊇)`, i.e. the
    /// intersection of the shifted values. Planar values only.
    pub fn sup_translate(&self, m: &CandidateSet) -> Result<SetFunction> {
        if self.cone.dim() != 2 || self.cone.extreme_rays_2d().is_none() {
            return Err(Error::Unsupported(format!(
                "sup-translation needs a planar cone with interior, got dimension {}",
                self.cone.dim()
            )));
        }
        let shifts = m.shifts();
        self.check_shifts(&shifts)?;
        Ok(SetFunction {
            space: self.space.translated(&shifts),
            cone: self.cone.clone(),
            evaluator: Evaluator::SupTranslation { base: Arc::new(self.clone()), shifts: Arc::new(shifts) },
        })
    }

    /// Sup-translation value computed by reflection: every value is mapped to
    /// `G(R², -C)` by `z ↦ -z`, where the intersection is the infimum for
    /// `⊆`, and the result is reflected back.
    pub fn eval_sup_reflected(&self, x: &[f64]) -> Result<GValue> {
        let Evaluator::SupTranslation { base, shifts } = &self.evaluator else {
            return Err(Error::Unsupported("reflected evaluation of a non sup-translation".into()));
        };
        if !self.space.contains(x) {
            return Err(Error::OutOfDomain(x.to_vec()));
        }
        let negated = Arc::new(self.cone.negated());
        let reflected = shifts
            .iter()
            .map(|y| Ok(base.eval_or_empty(&add(x, y))?.reflect_onto(negated.clone())))
            .collect::<Result<Vec<_>>>()?;
        Ok(lattice_sup_2d(&reflected)?.reflect_onto(self.cone.clone()))
    }

    fn check_shifts(&self, shifts: &[Point]) -> Result<()> {
        if shifts.is_empty() {
            return Err(Error::EmptyCandidate);
        }
        if shifts.iter().any(|y| y.len() != self.space.dim()) {
            return Err(Error::InvalidDimension("shift dimension differs from the space".into()));
        }
        Ok(())
    }

    /// `φ̂_{f,z*}(x; M) = inf_{y ∈ M} φ_{f,z*}(x + y)`, computed on the
    /// scalar side without forming set values.
    pub fn scalarized_inf_translation(&self, m: &CandidateSet, z: &[f64], x: &[f64]) -> Result<ExtReal> {
        if !self.cone.dual_contains(z, TOL_GEOM) {
            return Err(Error::InvalidDirection(z.to_vec()));
        }
        let shifts = m.shifts();
        self.check_shifts(&shifts)?;
        let mut best = ExtReal::POS_INF;
        for y in &shifts {
            best = best.min(self.phi(z, &add(x, y))?);
        }
        Ok(best)
    }
}

/// How `co M` is sampled.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoSampling {
    pub random: usize,
    pub seed: u64,
}

impl Default for CoSampling {
    fn default() -> Self {
        CoSampling { random: DEFAULT_CO_SAMPLES, seed: 0 }
    }
}

/// A finite candidate set `M ⊂ X`, optionally standing in for `co M`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CandidateSet {
    points: Vec<Point>,
    convexified: bool,
    co_sampling: CoSampling,
}

impl CandidateSet {
    /// Builds a candidate set, dropping duplicate points.
    pub fn new(points: Vec<Point>) -> Result<CandidateSet> {
        let first = points.first().ok_or(Error::EmptyCandidate)?;
        let dim = first.len();
        if points.iter().any(|p| p.len() != dim) {
            return Err(Error::InvalidDimension("candidate points differ in dimension".into()));
        }
        let mut unique: Vec<Point> = Vec::with_capacity(points.len());
        for p in points {
            if unique.iter().all(|q| dist_inf(q, &p) > GRID_TOL * (1.0 + crate::linalg::norm_inf(&p))) {
                unique.push(p);
            }
        }
        Ok(CandidateSet { points: unique, convexified: false, co_sampling: CoSampling::default() })
    }

    pub fn convexified(mut self, sampling: CoSampling) -> CandidateSet {
        self.convexified = true;
        self.co_sampling = sampling;
        self
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn is_convexified(&self) -> bool {
        self.convexified
    }

    pub fn co_sampling(&self) -> CoSampling {
        self.co_sampling
    }

    pub fn within(&self, space: &VarSpace) -> bool {
        self.points.iter().all(|p| space.contains(p))
    }

    /// The shifts used by translations: the points, followed by samples of
    /// `co M` when the set is convexified.
    pub fn shifts(&self) -> Vec<Point> {
        let mut out = self.points.clone();
        if self.convexified {
            out.extend(self.co_samples(self.co_sampling));
        }
        out
    }

    /// Points of `co M`: pairwise midpoints (consecutive midpoints only above
    /// [`PAIRWISE_MIDPOINT_CAP`] pairs) and seeded random convex combinations
    /// of up to `dim + 1` points.
    pub fn co_samples(&self, sampling: CoSampling) -> Vec<Point> {
        let m = &self.points;
        let n = m.len();
        let mut out = Vec::new();
        if n < 2 {
            return out;
        }
        let midpoint = |a: &Point, b: &Point| a.iter().zip(b).map(|(x, y)| 0.5 * (x + y)).collect::<Point>();
        if n * (n - 1) / 2 <= PAIRWISE_MIDPOINT_CAP {
            for i in 0..n {
                for j in i + 1..n {
                    out.push(midpoint(&m[i], &m[j]));
                }
            }
        } else {
            for w in m.windows(2) {
                out.push(midpoint(&w[0], &w[1]));
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(sampling.seed);
        let k = n.min(m[0].len() + 1).max(2);
        for _ in 0..sampling.random {
            let idx = rand::seq::index::sample(&mut rng, n, k);
            let w: Vec<f64> = (0..k).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
            let total: f64 = w.iter().sum();
            let pts: Vec<Point> = idx.iter().map(|i| m[i].clone()).collect();
            let weights: Vec<f64> = w.iter().map(|x| x / total).collect();
            out.push(crate::linalg::combination(&weights, &pts));
        }
        out
    }
}

/// Cached scalarization values `φ_{f,z*}(x)` over a direction base and a
/// point list. Built once, then read-only.
#[derive(Debug, Clone, Serialize)]
pub struct ScalarizationProfile {
    pub base: DualBase,
    pub points: Vec<Point>,
    /// `values[k][i] = φ_{f, z_k}(x_i)`.
    pub values: Vec<Vec<ExtReal>>,
}

impl ScalarizationProfile {
    pub fn build(f: &SetFunction, base: &DualBase, points: &[Point]) -> Result<ScalarizationProfile> {
        for z in base.directions() {
            if !f.cone().dual_contains(z, TOL_GEOM) {
                return Err(Error::InvalidDirection(z.clone()));
            }
        }
        let values = base
            .directions()
            .par_iter()
            .map(|z| points.iter().map(|x| f.phi(z, x)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        let profile = ScalarizationProfile { base: base.clone(), points: points.to_vec(), values };
        debug_assert!(profile.check_against(f, 0, 0));
        Ok(profile)
    }

    pub fn value(&self, direction: usize, point: usize) -> ExtReal {
        self.values[direction][point]
    }

    /// `min_i φ_{f,z_k}(x_i)` and its first argmin.
    pub fn min_over_points(&self, direction: usize) -> (ExtReal, Option<usize>) {
        let mut best = (ExtReal::POS_INF, None);
        for (i, v) in self.values[direction].iter().enumerate() {
            if *v < best.0 {
                best = (*v, Some(i));
            }
        }
        best
    }

    /// Re-evaluates one cached entry and compares it bit for bit.
    pub fn check_against(&self, f: &SetFunction, direction: usize, point: usize) -> bool {
        match (self.base.directions().get(direction), self.points.get(point)) {
            (Some(z), Some(x)) => f.phi(z, x).map(|v| v == self.values[direction][point]).unwrap_or(false),
            _ => true,
        }
    }
}
