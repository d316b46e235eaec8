//! The complete lattice `G(R^d, C)` of closed convex upper sets, stored as
//! `co(P) ⊕ C` for a finite generator list `P`, with `∅` as the top element.
//!
//! The order is `⊇`: a set is *smaller* when it is *larger* as a set. Infima
//! are closed convex hulls of unions, suprema are intersections.
//!
//! Planar values on a cone with two extreme rays are handled exactly through
//! their facet description. In other dimensions membership is decided by a
//! support certificate over the cone's sampled dual directions.

use std::cmp::Ordering;
use std::fmt;
use std::ops::Add;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::cone::{Cone, TOL_GEOM};
use crate::error::{Error, Result};
use crate::linalg::{dot, norm2, scaled, Point};

/// Default bound on the number of generators an operation may produce.
pub const GENERATOR_CAP: usize = 10_000;

/// Relative slack used when pruning generators.
const PRUNE_TOL: f64 = 1e-12;

/// An extended real number: finite, `+∞` or `-∞`. Never NaN.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExtReal(f64);

impl ExtReal {
    pub const POS_INF: ExtReal = ExtReal(f64::INFINITY);
    pub const NEG_INF: ExtReal = ExtReal(f64::NEG_INFINITY);

    pub fn new(v: f64) -> ExtReal {
        assert!(!v.is_nan(), "ExtReal cannot hold NaN");
        ExtReal(v)
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_finite(self) -> bool {
        self.0.is_finite()
    }

    pub fn is_pos_inf(self) -> bool {
        self.0 == f64::INFINITY
    }

    pub fn min(self, other: ExtReal) -> ExtReal {
        if other < self {
            other
        } else {
            self
        }
    }

    pub fn scale(self, t: f64) -> ExtReal {
        assert!(t > 0.0);
        ExtReal(self.0 * t)
    }
}

impl Eq for ExtReal {}

impl PartialOrd for ExtReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExtReal {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.partial_cmp(&other.0).expect("ExtReal is never NaN")
    }
}

/// `+∞` absorbs: the support of `∅ ⊕ A = ∅` is `+∞` whatever `A` is.
impl Add for ExtReal {
    type Output = ExtReal;
    fn add(self, rhs: ExtReal) -> ExtReal {
        if self.is_pos_inf() || rhs.is_pos_inf() {
            ExtReal::POS_INF
        } else {
            ExtReal(self.0 + rhs.0)
        }
    }
}

impl From<f64> for ExtReal {
    fn from(v: f64) -> Self {
        ExtReal::new(v)
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 == f64::INFINITY {
            write!(f, "inf")
        } else if self.0 == f64::NEG_INFINITY {
            write!(f, "-inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl Serialize for ExtReal {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_finite() {
            s.serialize_f64(self.0)
        } else {
            s.serialize_str(&self.to_string())
        }
    }
}

impl<'de> Deserialize<'de> for ExtReal {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Text(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(ExtReal(v)),
            Repr::Text(t) => match t.as_str() {
                "inf" | "+inf" => Ok(ExtReal::POS_INF),
                "-inf" => Ok(ExtReal::NEG_INF),
                other => Err(serde::de::Error::custom(format!("bad extended real {other:?}"))),
            },
        }
    }
}

/// An element of `G(R^d, C)`: `co(generators) ⊕ C`, or `∅` when the generator
/// list is empty.
///
/// `PartialEq` compares representations; use [`GValue::equals`] for set
/// equality.
#[derive(Debug, Clone, PartialEq)]
pub struct GValue {
    cone: Arc<Cone>,
    generators: Vec<Point>,
}

/// JSON form of a value: `{"generators": [[...], ...]}`, empty meaning `∅`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GValueJson {
    pub generators: Vec<Point>,
}

impl GValue {
    pub fn new(cone: Arc<Cone>, generators: Vec<Point>) -> Result<GValue> {
        let d = cone.dim();
        if let Some(bad) = generators.iter().find(|p| p.len() != d) {
            return Err(Error::InvalidDimension(format!("generator {bad:?} does not have dimension {d}")));
        }
        if generators.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("generators must be finite".into()));
        }
        Ok(GValue { cone, generators })
    }

    /// `{p} ⊕ C`.
    pub fn point(cone: Arc<Cone>, p: Point) -> Result<GValue> {
        GValue::new(cone, vec![p])
    }

    pub fn empty(cone: Arc<Cone>) -> GValue {
        GValue { cone, generators: Vec::new() }
    }

    /// `0 · A = cl C`, the neutral element of `⊕`.
    pub fn zero(cone: Arc<Cone>) -> GValue {
        let d = cone.dim();
        GValue { cone, generators: vec![vec![0.0; d]] }
    }

    pub fn from_json(cone: Arc<Cone>, json: &GValueJson) -> Result<GValue> {
        GValue::new(cone, json.generators.clone())
    }

    pub fn to_json(&self) -> GValueJson {
        GValueJson { generators: self.generators.clone() }
    }

    pub fn cone(&self) -> &Arc<Cone> {
        &self.cone
    }

    pub fn generators(&self) -> &[Point] {
        &self.generators
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.cone.dim()
    }

    fn same_cone(&self, other: &GValue) -> Result<()> {
        if Arc::ptr_eq(&self.cone, &other.cone) || *self.cone == *other.cone {
            Ok(())
        } else {
            Err(Error::IncompatibleCone)
        }
    }

    /// `A ⊕ B = cl(A + B)` with `A ⊕ ∅ = ∅ ⊕ A = ∅`.
    pub fn oplus(&self, other: &GValue) -> Result<GValue> {
        self.oplus_capped(other, GENERATOR_CAP)
    }

    pub fn oplus_capped(&self, other: &GValue, cap: usize) -> Result<GValue> {
        self.same_cone(other)?;
        if self.is_empty() || other.is_empty() {
            return Ok(GValue::empty(self.cone.clone()));
        }
        let count = self.generators.len() * other.generators.len();
        if count > cap {
            return Err(Error::GeneratorCap { count, cap });
        }
        let mut sums = Vec::with_capacity(count);
        for p in &self.generators {
            for q in &other.generators {
                sums.push(crate::linalg::add(p, q));
            }
        }
        Ok(GValue { cone: self.cone.clone(), generators: sums }.prune())
    }

    /// `t · A`, with `0 · A = cl C` for every `A` including `∅`.
    pub fn scale(&self, t: f64) -> Result<GValue> {
        if t < 0.0 || !t.is_finite() {
            return Err(Error::InvalidScalar(t));
        }
        if t == 0.0 {
            return Ok(GValue::zero(self.cone.clone()));
        }
        let generators = self.generators.iter().map(|p| scaled(t, p)).collect();
        Ok(GValue { cone: self.cone.clone(), generators })
    }

    /// `z ↦ -z`, landing in `G(R^d, -C)`.
    pub fn reflect(&self) -> GValue {
        let cone = Arc::new(self.cone.negated());
        let generators = self.generators.iter().map(|p| scaled(-1.0, p)).collect();
        GValue { cone, generators }
    }

    /// Reflection onto a given cone, which must be the negation of this
    /// value's cone.
    pub fn reflect_onto(&self, cone: Arc<Cone>) -> GValue {
        debug_assert!(*cone == self.cone.negated());
        let generators = self.generators.iter().map(|p| scaled(-1.0, p)).collect();
        GValue { cone, generators }
    }

    /// `inf_{z ∈ A} z*·z`: `+∞` for `∅`, `-∞` when `z* ∉ C⁺`, otherwise the
    /// minimum over generators.
    pub fn support(&self, z: &[f64]) -> Result<ExtReal> {
        if z.len() != self.dim() {
            return Err(Error::InvalidDimension(format!(
                "direction of dimension {} for a value in dimension {}",
                z.len(),
                self.dim()
            )));
        }
        if self.is_empty() {
            return Ok(ExtReal::POS_INF);
        }
        if !self.cone.dual_contains(z, TOL_GEOM) {
            return Ok(ExtReal::NEG_INF);
        }
        Ok(ExtReal(self.support_in_dual(z)))
    }

    /// Support value for a direction already known to lie in `C⁺`.
    pub(crate) fn support_in_dual(&self, z: &[f64]) -> f64 {
        self.generators.iter().map(|p| dot(z, p)).fold(f64::INFINITY, f64::min)
    }

    /// `q ∈ A` with slack `tol`.
    pub fn contains_point(&self, q: &[f64], tol: f64) -> Result<bool> {
        if q.len() != self.dim() {
            return Err(Error::InvalidDimension(format!("point {q:?}")));
        }
        if self.is_empty() {
            return Ok(false);
        }
        if let Some(frame) = PlanarFrame::new(&self.cone) {
            let facets = frame.facets(&self.generators);
            return Ok(facets.iter().all(|f| f.slack(q) >= -tol));
        }
        // exact sufficient test: q above a single generator
        if self.generators.iter().any(|p| self.cone.contains(&crate::linalg::sub(q, p), tol)) {
            return Ok(true);
        }
        Ok(self.cone.certificate().iter().all(|z| dot(z, q) >= self.support_in_dual(z) - tol * norm2(z)))
    }

    /// `self ⊇ other`, i.e. `self ≤ other` in `(G, ⊇)`.
    pub fn order_geq(&self, other: &GValue, tol: f64) -> Result<bool> {
        self.same_cone(other)?;
        if other.is_empty() {
            return Ok(true);
        }
        if self.is_empty() {
            return Ok(false);
        }
        if let Some(frame) = PlanarFrame::new(&self.cone) {
            let facets = frame.facets(&self.generators);
            return Ok(other.generators.iter().all(|q| facets.iter().all(|f| f.slack(q) >= -tol)));
        }
        for q in &other.generators {
            if !self.contains_point(q, tol)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn equals(&self, other: &GValue, tol: f64) -> Result<bool> {
        Ok(self.order_geq(other, tol)? && other.order_geq(self, tol)?)
    }

    /// Drops generators that lie in the value spanned by the others. In the
    /// plane the result is the exact vertex list of the upper set; elsewhere
    /// duplicates and generators dominated by a single other generator are
    /// removed.
    pub fn prune(&self) -> GValue {
        if self.generators.len() <= 1 {
            return self.clone();
        }
        let keep: Vec<usize> = match PlanarFrame::new(&self.cone) {
            Some(frame) => frame.chain(&self.generators),
            None => dominance_prune(&self.cone, &self.generators),
        };
        let generators = keep.into_iter().map(|i| self.generators[i].clone()).collect();
        GValue { cone: self.cone.clone(), generators }
    }

    /// Facet description `{z : n·z ≥ h}` of a planar value.
    pub fn facets_2d(&self) -> Option<Vec<Facet>> {
        if self.is_empty() {
            return None;
        }
        PlanarFrame::new(&self.cone).map(|f| f.facets(&self.generators))
    }

    /// Boundary of a planar value for plotting: the recession direction
    /// leaving the first vertex, the ordered vertex list, and the recession
    /// direction leaving the last vertex.
    pub fn boundary_2d(&self) -> Option<Boundary2d> {
        if self.is_empty() {
            return None;
        }
        let frame = PlanarFrame::new(&self.cone)?;
        let vertices = frame.chain(&self.generators).into_iter().map(|i| self.generators[i].clone()).collect();
        Some(Boundary2d { start_direction: frame.rays[1].clone(), vertices, end_direction: frame.rays[0].clone() })
    }
}

/// The closed convex hull of the union: `inf` in `(G, ⊇)`. An all-`∅` family
/// yields `∅`.
pub fn lattice_inf(family: &[GValue]) -> Result<GValue> {
    lattice_inf_capped(family, GENERATOR_CAP)
}

pub fn lattice_inf_capped(family: &[GValue], cap: usize) -> Result<GValue> {
    let first = family.first().ok_or(Error::EmptyFamily)?;
    for a in &family[1..] {
        first.same_cone(a)?;
    }
    let count: usize = family.iter().map(|a| a.generators.len()).sum();
    if count > cap {
        return Err(Error::GeneratorCap { count, cap });
    }
    let mut generators = Vec::with_capacity(count);
    for a in family {
        generators.extend(a.generators.iter().cloned());
    }
    Ok(GValue { cone: first.cone.clone(), generators }.prune())
}

/// The intersection of planar values: `sup` in `(G, ⊇)`.
pub fn lattice_sup_2d(family: &[GValue]) -> Result<GValue> {
    let first = family.first().ok_or(Error::EmptyFamily)?;
    if first.dim() != 2 {
        return Err(Error::Unsupported(format!("lattice supremum in dimension {}", first.dim())));
    }
    for a in &family[1..] {
        first.same_cone(a)?;
    }
    let cone = first.cone.clone();
    if family.iter().any(GValue::is_empty) {
        return Ok(GValue::empty(cone));
    }
    let frame = PlanarFrame::new(&cone).ok_or_else(|| Error::Unsupported("planar cone without interior".into()))?;
    let facets: Vec<Facet> = family.iter().flat_map(|a| frame.facets(&a.generators)).collect();
    let scale = family.iter().flat_map(|a| a.generators.iter()).flatten().fold(1.0f64, |m, x| m.max(x.abs()));
    let feasible_tol = TOL_GEOM * scale;
    let mut vertices: Vec<Point> = Vec::new();
    for (i, f) in facets.iter().enumerate() {
        for g in &facets[i + 1..] {
            let det = f.normal[0] * g.normal[1] - f.normal[1] * g.normal[0];
            if det.abs() < 1e-12 {
                continue;
            }
            let x = (f.offset * g.normal[1] - g.offset * f.normal[1]) / det;
            let y = (f.normal[0] * g.offset - g.normal[0] * f.offset) / det;
            let v = vec![x, y];
            if facets.iter().all(|h| h.slack(&v) >= -feasible_tol) {
                vertices.push(v);
            }
        }
    }
    Ok(GValue { cone, generators: vertices }.prune())
}

/// A half-plane `{z : normal·z ≥ offset}` with a unit normal.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Facet {
    pub normal: Point,
    pub offset: f64,
}

impl Facet {
    pub fn slack(&self, z: &[f64]) -> f64 {
        dot(&self.normal, z) - self.offset
    }
}

/// Planar boundary data for export.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Boundary2d {
    pub start_direction: Point,
    pub vertices: Vec<Point>,
    pub end_direction: Point,
}

/// Linear frame `T = [r₁ r₂]⁻¹` sending the extreme rays of a planar cone to
/// the unit vectors, so that `C` becomes the nonnegative quadrant.
struct PlanarFrame {
    t: [[f64; 2]; 2],
    rays: [Point; 2],
}

impl PlanarFrame {
    fn new(cone: &Cone) -> Option<PlanarFrame> {
        let [r1, r2] = cone.extreme_rays_2d()?;
        let det = r1[0] * r2[1] - r2[0] * r1[1];
        let t = [[r2[1] / det, -r2[0] / det], [-r1[1] / det, r1[0] / det]];
        Some(PlanarFrame { t, rays: [r1.clone(), r2.clone()] })
    }

    fn map(&self, z: &[f64]) -> [f64; 2] {
        [self.t[0][0] * z[0] + self.t[0][1] * z[1], self.t[1][0] * z[0] + self.t[1][1] * z[1]]
    }

    /// `Tᵀ n`, normalized.
    fn pull_normal(&self, n: [f64; 2]) -> Point {
        let v = vec![self.t[0][0] * n[0] + self.t[1][0] * n[1], self.t[0][1] * n[0] + self.t[1][1] * n[1]];
        let s = norm2(&v);
        v.into_iter().map(|x| x / s).collect()
    }

    /// Indices of the vertices of `co(P) + C`, ordered by increasing first
    /// frame coordinate.
    fn chain(&self, points: &[Point]) -> Vec<usize> {
        let mapped: Vec<[f64; 2]> = points.iter().map(|p| self.map(p)).collect();
        let scale = mapped.iter().flatten().fold(1.0f64, |m, x| m.max(x.abs()));
        let tol = PRUNE_TOL * scale;
        let mut order: Vec<usize> = (0..points.len()).collect();
        order.sort_by(|&i, &j| {
            mapped[i][0].total_cmp(&mapped[j][0]).then(mapped[i][1].total_cmp(&mapped[j][1])).then(i.cmp(&j))
        });
        // staircase: strictly decreasing second coordinate
        let mut stair: Vec<usize> = Vec::with_capacity(order.len());
        for i in order {
            match stair.last() {
                Some(&last) if mapped[i][1] >= mapped[last][1] - tol => {}
                _ => stair.push(i),
            }
        }
        // lower convex hull of the staircase
        let mut hull: Vec<usize> = Vec::with_capacity(stair.len());
        for i in stair {
            while hull.len() >= 2 {
                let a = mapped[hull[hull.len() - 2]];
                let b = mapped[hull[hull.len() - 1]];
                let c = mapped[i];
                let ab = [b[0] - a[0], b[1] - a[1]];
                let ac = [c[0] - a[0], c[1] - a[1]];
                let cross = ab[0] * ac[1] - ab[1] * ac[0];
                let len = (ac[0] * ac[0] + ac[1] * ac[1]).sqrt();
                // b is kept only if it lies strictly below the segment a–c
                if cross <= tol * len {
                    hull.pop();
                } else {
                    break;
                }
            }
            hull.push(i);
        }
        hull
    }

    fn facets(&self, points: &[Point]) -> Vec<Facet> {
        let chain = self.chain(points);
        let mapped: Vec<[f64; 2]> = chain.iter().map(|&i| self.map(&points[i])).collect();
        let mut out = Vec::with_capacity(chain.len() + 1);
        let mut push = |n_frame: [f64; 2], vertex: &Point| {
            let normal = self.pull_normal(n_frame);
            let offset = dot(&normal, vertex);
            out.push(Facet { normal, offset });
        };
        push([1.0, 0.0], &points[chain[0]]);
        for k in 0..chain.len() - 1 {
            let (a, b) = (mapped[k], mapped[k + 1]);
            push([a[1] - b[1], b[0] - a[0]], &points[chain[k]]);
        }
        push([0.0, 1.0], &points[*chain.last().unwrap()]);
        out
    }
}

fn dominance_prune(cone: &Cone, points: &[Point]) -> Vec<usize> {
    let scale = points.iter().flatten().fold(1.0f64, |m, x| m.max(x.abs()));
    let tol = PRUNE_TOL * scale;
    let n = points.len();
    let mut removed = vec![false; n];
    for i in 0..n {
        for j in 0..n {
            if i == j || removed[j] {
                continue;
            }
            let diff = crate::linalg::sub(&points[i], &points[j]);
            if cone.contains(&diff, tol) {
                removed[i] = true;
                break;
            }
        }
    }
    (0..n).filter(|&i| !removed[i]).collect()
}
