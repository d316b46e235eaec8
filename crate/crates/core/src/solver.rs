//! Parametric scalarization: sweep a base of `C⁺`, minimize each
//! `φ_{f,z*}`, collect the minimizers into a candidate set and check it
//! against the infimizer, co-hull and z*-minimizer conditions.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::cone::{DualBase, TOL_GEOM};
use crate::error::{Error, Result};
use crate::gset::{lattice_inf, ExtReal, GValue};
use crate::linalg::{dist_inf, norm_inf, Point};
use crate::setfn::{CandidateSet, CoSampling, SetFunction, VarSpace};

pub const DEFAULT_STEP_TOL: f64 = 1e-8;
pub const DEFAULT_TOL_GRID: f64 = 1e-6;
pub const DEFAULT_TOL_BOX: f64 = 1e-3;

/// Salt separating verification probes from construction samples.
const VERIFY_STREAM: u64 = 0x9e37_79b9_7f4a_7c15;

/// `tol_val` default for a space.
pub fn default_tolerance(space: &VarSpace) -> f64 {
    if space.is_grid() {
        DEFAULT_TOL_GRID
    } else {
        DEFAULT_TOL_BOX
    }
}

/// The verification probe for a space: the grid itself, or a seeded
/// quasi-random sample drawn from a stream disjoint from construction.
pub fn verification_probe(space: &VarSpace, res: usize, seed: u64) -> Vec<Point> {
    space.probe(res, seed ^ VERIFY_STREAM)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MinimizeOptions {
    pub step_tol: f64,
    pub max_iter: usize,
    /// Random starts drawn before the pattern search.
    pub starts: usize,
    /// Initial step as a fraction of each box side.
    pub initial_step: f64,
    pub seed: u64,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        MinimizeOptions { step_tol: DEFAULT_STEP_TOL, max_iter: 100_000, starts: 64, initial_step: 0.25, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalarMinResult {
    pub direction: Point,
    pub minimizer: Option<Point>,
    pub value: ExtReal,
    pub iterations: usize,
    pub converged: bool,
    pub step_at_exit: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub flag: Option<String>,
}

fn check_direction(f: &SetFunction, z: &[f64]) -> Result<()> {
    if z.len() != f.cone().dim() || !f.cone().dual_contains(z, TOL_GEOM) || norm_inf(z) <= TOL_GEOM {
        return Err(Error::InvalidDirection(z.to_vec()));
    }
    Ok(())
}

/// Minimizes `φ_{f,z*}` over the variable space: exhaustively on a grid, by
/// compass search on a box. A box minimizer that sits on the boundary with
/// `φ` strictly increasing inward is reported with `converged = false`.
pub fn scalar_minimize(f: &SetFunction, z: &[f64], opts: &MinimizeOptions) -> Result<ScalarMinResult> {
    check_direction(f, z)?;
    match f.space() {
        VarSpace::Grid(points) => {
            let mut best: Option<(usize, ExtReal)> = None;
            for (i, x) in points.iter().enumerate() {
                let v = f.phi(z, x)?;
                if best.is_none_or(|(_, b)| v < b) {
                    best = Some((i, v));
                }
            }
            let (i, v) = best.expect("grid is nonempty");
            if v.is_pos_inf() {
                return Err(Error::InfeasibleEverywhere);
            }
            Ok(ScalarMinResult {
                direction: z.to_vec(),
                minimizer: Some(points[i].clone()),
                value: v,
                iterations: points.len(),
                converged: true,
                step_at_exit: 0.0,
                flag: None,
            })
        }
        VarSpace::Box { lower, upper } => pattern_search(f, z, lower, upper, opts),
    }
}

fn pattern_search(
    f: &SetFunction,
    z: &[f64],
    lower: &[f64],
    upper: &[f64],
    opts: &MinimizeOptions,
) -> Result<ScalarMinResult> {
    let n = lower.len();
    let width: Vec<f64> = lower.iter().zip(upper).map(|(l, u)| u - l).collect();
    let mut x: Option<(Point, ExtReal)> = None;
    for s in f.space().construction_samples(opts.starts, opts.seed) {
        let v = f.phi(z, &s)?;
        if x.as_ref().is_none_or(|(_, b)| v < *b) {
            x = Some((s, v));
        }
    }
    let (mut x, mut fx) = x.expect("at least one start");
    if fx.is_pos_inf() {
        return Err(Error::InfeasibleEverywhere);
    }
    let mut step: Vec<f64> = width.iter().map(|w| opts.initial_step * w).collect();
    let mut iterations = 0;
    let clip = |v: f64, i: usize| v.clamp(lower[i], upper[i]);
    while iterations < opts.max_iter && step.iter().cloned().fold(0.0, f64::max) >= opts.step_tol {
        iterations += 1;
        let mut best: Option<(Point, ExtReal)> = None;
        for i in 0..n {
            if width[i] == 0.0 {
                continue;
            }
            for sign in [1.0, -1.0] {
                let mut trial = x.clone();
                trial[i] = clip(x[i] + sign * step[i], i);
                if trial[i] == x[i] {
                    continue;
                }
                let v = f.phi(z, &trial)?;
                if v < fx && best.as_ref().is_none_or(|(_, b)| v < *b) {
                    best = Some((trial, v));
                }
            }
        }
        match best {
            Some((t, v)) => {
                x = t;
                fx = v;
                for (s, w) in step.iter_mut().zip(&width) {
                    *s = (*s * 2.0).min(*w);
                }
            }
            None => step.iter_mut().for_each(|s| *s *= 0.5),
        }
    }
    let step_at_exit = step.iter().cloned().fold(0.0, f64::max);
    let mut flag = None;
    if step_at_exit >= opts.step_tol {
        flag = Some("iteration limit reached".to_string());
    } else if let Some(axis) = boundary_descent(f, z, &x, fx, lower, upper)? {
        flag = Some(format!("no interior minimizer: value decreases into the box boundary along axis {axis}"));
    }
    Ok(ScalarMinResult {
        direction: z.to_vec(),
        minimizer: Some(x),
        value: fx,
        iterations,
        converged: flag.is_none(),
        step_at_exit,
        flag,
    })
}

/// The axis along which `x` sits on the box boundary while `φ` strictly
/// increases when stepping inward.
fn boundary_descent(
    f: &SetFunction,
    z: &[f64],
    x: &[f64],
    fx: ExtReal,
    lower: &[f64],
    upper: &[f64],
) -> Result<Option<usize>> {
    for i in 0..x.len() {
        let w = upper[i] - lower[i];
        if w == 0.0 {
            continue;
        }
        let delta = 1e-6 * w;
        let inward = if x[i] <= lower[i] {
            Some(x[i] + delta)
        } else if x[i] >= upper[i] {
            Some(x[i] - delta)
        } else {
            None
        };
        if let Some(v) = inward {
            let mut trial = x.to_vec();
            trial[i] = v;
            if f.phi(z, &trial)? > fx {
                return Ok(Some(i));
            }
        }
    }
    Ok(None)
}

/// `scalar_minimize` for every base direction, in base order. Errors become
/// flagged, non-converged entries.
pub fn sweep(f: &SetFunction, base: &DualBase, opts: &MinimizeOptions) -> Vec<ScalarMinResult> {
    base.directions()
        .par_iter()
        .map(|z| {
            scalar_minimize(f, z, opts).unwrap_or_else(|e| ScalarMinResult {
                direction: z.clone(),
                minimizer: None,
                value: ExtReal::POS_INF,
                iterations: 0,
                converged: false,
                step_at_exit: f64::NAN,
                flag: Some(e.to_string()),
            })
        })
        .collect()
}

/// Minimizers of the converged results, with points within `merge_tol`
/// (sup-norm) of a running cluster centroid merged into it.
pub fn collect_candidate(results: &[ScalarMinResult], merge_tol: f64) -> Result<CandidateSet> {
    let mut clusters: Vec<(Point, usize)> = Vec::new();
    for x in results.iter().filter(|r| r.converged).filter_map(|r| r.minimizer.as_ref()) {
        match clusters.iter_mut().find(|(c, _)| dist_inf(c, x) <= merge_tol) {
            Some((c, k)) => {
                *k += 1;
                let k = *k as f64;
                for (ci, xi) in c.iter_mut().zip(x) {
                    *ci += (xi - *ci) / k;
                }
            }
            None => clusters.push((x.clone(), 1)),
        }
    }
    if clusters.is_empty() {
        return Err(Error::EmptyCandidate);
    }
    CandidateSet::new(clusters.into_iter().map(|(c, _)| c).collect())
}

/// Gap tables of the infimizer test.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InfimizerCheck {
    /// `min_{y ∈ M} φ(y)` per direction.
    pub candidate_min: Vec<ExtReal>,
    /// `min_{x ∈ probe} φ(x)` per direction.
    pub probe_min: Vec<ExtReal>,
    /// `max(0, candidate_min − probe_min)` per direction.
    pub gaps: Vec<ExtReal>,
    /// `max_k max(0, min_M φ_k − min_{co-samples} φ_k)`.
    pub co_gap: ExtReal,
    pub is_infimizer: bool,
}

fn min_phi(f: &SetFunction, z: &[f64], points: &[Point]) -> Result<ExtReal> {
    let mut best = ExtReal::POS_INF;
    for x in points {
        best = best.min(f.phi(z, x)?);
    }
    Ok(best)
}

fn excess(a: ExtReal, b: ExtReal) -> ExtReal {
    if a <= b {
        ExtReal::new(0.0)
    } else if a.is_pos_inf() || b == ExtReal::NEG_INF {
        ExtReal::POS_INF
    } else {
        ExtReal::new(a.value() - b.value())
    }
}

/// Compares `min_M φ_{f,z*}` with the probe minimum for every base
/// direction, and `M` with samples of `co M`.
pub fn verify_infimizer(
    f: &SetFunction,
    m: &CandidateSet,
    base: &DualBase,
    probe: &[Point],
    co: CoSampling,
    tol: f64,
) -> Result<InfimizerCheck> {
    if m.is_empty() {
        return Err(Error::EmptyCandidate);
    }
    for z in base.directions() {
        check_direction(f, z)?;
    }
    let co_points = m.co_samples(co);
    let rows = base
        .directions()
        .par_iter()
        .map(|z| {
            let cm = min_phi(f, z, m.points())?;
            let pm = min_phi(f, z, probe)?;
            let com = min_phi(f, z, &co_points)?;
            Ok((cm, pm, excess(cm, pm), excess(cm, com)))
        })
        .collect::<Result<Vec<_>>>()?;
    let co_gap = rows.iter().map(|r| r.3).max().unwrap_or(ExtReal::new(0.0));
    let gaps: Vec<ExtReal> = rows.iter().map(|r| r.2).collect();
    let is_infimizer = gaps.iter().all(|g| *g <= ExtReal::new(tol));
    Ok(InfimizerCheck {
        candidate_min: rows.iter().map(|r| r.0).collect(),
        probe_min: rows.iter().map(|r| r.1).collect(),
        gaps,
        co_gap,
        is_infimizer,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    ScSolution,
    InfimizerOnly,
    Fail,
}

impl Verdict {
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::ScSolution => 0,
            Verdict::InfimizerOnly => 2,
            Verdict::Fail => 3,
        }
    }
}

/// Best direction for a candidate point: `min_k (φ_k(y) − min_probe φ_k)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointCheck {
    pub point: Point,
    pub direction: Option<usize>,
    pub residual: ExtReal,
    pub passes: bool,
    pub lattice_minimizer: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifySettings {
    pub tol: f64,
    pub probe_size: usize,
    pub probe_res: usize,
    pub seed: u64,
    pub co_sampling: CoSampling,
    pub directions: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolutionReport {
    pub candidate: Vec<Point>,
    pub convexified: bool,
    /// Direction weights on the dual generators, in base order.
    pub weights: Vec<Point>,
    pub directions: Vec<Point>,
    pub per_direction: Vec<ScalarMinResult>,
    pub infimizer: InfimizerCheck,
    pub points: Vec<PointCheck>,
    pub verdict: Verdict,
    pub settings: VerifySettings,
}

/// Checks the three sc-solution conditions on a probe: `M` generates the
/// scalarized infima (gaps), `co M` adds nothing (co-gap), and every point of
/// `M` is a z*-minimizer for some base direction (residuals).
pub fn verify_sc_solution(
    f: &SetFunction,
    m: &CandidateSet,
    base: &DualBase,
    probe: &[Point],
    settings: VerifySettings,
) -> Result<SolutionReport> {
    let tol = settings.tol;
    let inf = verify_infimizer(f, m, base, probe, settings.co_sampling, tol)?;
    let points = m
        .points()
        .par_iter()
        .map(|y| {
            let mut best: (Option<usize>, ExtReal) = (None, ExtReal::POS_INF);
            for (k, z) in base.directions().iter().enumerate() {
                let r = residual(f.phi(z, y)?, inf.probe_min[k]);
                if best.0.is_none() || r < best.1 {
                    best = (Some(k), r);
                }
            }
            Ok(PointCheck {
                point: y.clone(),
                direction: best.0,
                residual: best.1,
                passes: best.1 <= ExtReal::new(tol),
                lattice_minimizer: verify_lattice_minimizer(f, y, probe)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let infimizer_ok = inf.is_infimizer && inf.co_gap <= ExtReal::new(tol);
    let verdict = match (infimizer_ok, points.iter().all(|p| p.passes)) {
        (true, true) => Verdict::ScSolution,
        (true, false) => Verdict::InfimizerOnly,
        _ => Verdict::Fail,
    };
    Ok(SolutionReport {
        candidate: m.points().to_vec(),
        convexified: m.is_convexified(),
        weights: base.weights().to_vec(),
        directions: base.directions().to_vec(),
        per_direction: Vec::new(),
        infimizer: inf,
        points,
        verdict,
        settings,
    })
}

fn residual(value: ExtReal, probe_min: ExtReal) -> ExtReal {
    match (value.is_finite(), probe_min.is_finite()) {
        (true, true) => ExtReal::new(value.value() - probe_min.value()),
        (false, _) => ExtReal::POS_INF,
        (true, false) => {
            if probe_min.is_pos_inf() {
                ExtReal::NEG_INF
            } else {
                ExtReal::POS_INF
            }
        }
    }
}

/// `true` iff no probe value is strictly smaller than `f(x̄)` in `(G, ⊇)`.
pub fn verify_lattice_minimizer(f: &SetFunction, xbar: &[f64], probe: &[Point]) -> Result<bool> {
    let fx = f.eval(xbar)?;
    for x in probe {
        let v = f.eval_or_empty(x)?;
        if v.order_geq(&fx, TOL_GEOM)? && !v.equals(&fx, TOL_GEOM)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `inf_{y ∈ M} f(y)`, pruned.
pub fn build_infimum(f: &SetFunction, m: &CandidateSet) -> Result<GValue> {
    let values = m.points().iter().map(|y| f.eval(y)).collect::<Result<Vec<_>>>()?;
    lattice_inf(&values)
}

/// Seeded `co M` sampling settings derived from a run seed.
pub fn co_sampling(random: usize, seed: u64) -> CoSampling {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ VERIFY_STREAM.rotate_left(17));
    CoSampling { random, seed: rand::Rng::gen(&mut rng) }
}
