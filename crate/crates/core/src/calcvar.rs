//! Multi-criteria calculus of variations on a uniform mesh.
//!
//! An arc is stored by its nodal values `x_0, …, x_N` with fixed endpoints.
//! On each interval `[t_i, t_{i+1}]` the Lagrangian is evaluated at the
//! midpoint time with the averaged state `(x_i + x_{i+1}) / 2` and the
//! difference quotient `(x_{i+1} − x_i) / h`, and weighted by `h`:
//!
//! `F(x) ≈ Σ_i h · L(t_i + h/2, (x_i + x_{i+1})/2, (x_{i+1} − x_i)/h)`.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cone::{Cone, DualBase, TOL_GEOM};
use crate::error::{Error, Result};
use crate::linalg::{dot, Point};

/// A `C¹` Lagrangian `L: [a, b] × Rⁿ × Rⁿ → R^d`. Derivative outputs are
/// row-major `d × n` matrices.
pub trait Lagrangian: Send + Sync {
    fn n(&self) -> usize;
    fn d(&self) -> usize;
    fn value(&self, t: f64, y: &[f64], p: &[f64], out: &mut [f64]);
    fn grad_y(&self, t: f64, y: &[f64], p: &[f64], out: &mut [f64]);
    fn grad_p(&self, t: f64, y: &[f64], p: &[f64], out: &mut [f64]);
    /// The caller's assertion that every `ζᵀL`, `ζ ∈ C⁺`, is jointly convex
    /// in `(y, p)`.
    fn is_convex(&self) -> bool;
}

/// `L(t, y, p) = (|p|², w |y|²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadraticLagrangian {
    pub n: usize,
    pub y_weight: f64,
    /// Multiplies the reported `∂L/∂p`; anything but 1 is wrong on purpose.
    pub derivative_scale: f64,
}

impl QuadraticLagrangian {
    pub fn new(n: usize) -> QuadraticLagrangian {
        QuadraticLagrangian { n, y_weight: 1.0, derivative_scale: 1.0 }
    }
}

impl Lagrangian for QuadraticLagrangian {
    fn n(&self) -> usize {
        self.n
    }

    fn d(&self) -> usize {
        2
    }

    fn value(&self, _t: f64, y: &[f64], p: &[f64], out: &mut [f64]) {
        out[0] = dot(p, p);
        out[1] = self.y_weight * dot(y, y);
    }

    fn grad_y(&self, _t: f64, y: &[f64], _p: &[f64], out: &mut [f64]) {
        let n = self.n;
        out[..n].fill(0.0);
        for j in 0..n {
            out[n + j] = 2.0 * self.y_weight * y[j];
        }
    }

    fn grad_p(&self, _t: f64, _y: &[f64], p: &[f64], out: &mut [f64]) {
        let n = self.n;
        for j in 0..n {
            out[j] = 2.0 * self.derivative_scale * p[j];
        }
        out[n..2 * n].fill(0.0);
    }

    fn is_convex(&self) -> bool {
        self.y_weight >= 0.0
    }
}

/// Catalog Lagrangians by name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LagrangianSpec {
    pub catalog: String,
    #[serde(default)]
    pub params: serde_json::Map<String, serde_json::Value>,
}

impl LagrangianSpec {
    pub fn build(&self, n: usize) -> Result<Arc<dyn Lagrangian>> {
        let num = |key: &str, default: f64| -> Result<f64> {
            match self.params.get(key) {
                None => Ok(default),
                Some(v) => v.as_f64().ok_or_else(|| Error::InvalidInput(format!("parameter {key} must be a number"))),
            }
        };
        match self.catalog.as_str() {
            "quadratic_cvp" => {
                for key in self.params.keys() {
                    if key != "y_weight" && key != "derivative_scale" {
                        return Err(Error::InvalidInput(format!("unknown quadratic_cvp parameter {key}")));
                    }
                }
                Ok(Arc::new(QuadraticLagrangian {
                    n,
                    y_weight: num("y_weight", 1.0)?,
                    derivative_scale: num("derivative_scale", 1.0)?,
                }))
            }
            other => Err(Error::InvalidInput(format!("unknown Lagrangian {other:?}"))),
        }
    }
}

/// A Lagrangian whose analytic derivatives agreed with central differences
/// at seeded sample points.
#[derive(Clone)]
pub struct RegisteredLagrangian {
    inner: Arc<dyn Lagrangian>,
    max_relative_error: f64,
}

impl fmt::Debug for RegisteredLagrangian {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RegisteredLagrangian(n = {}, d = {})", self.inner.n(), self.inner.d())
    }
}

/// Relative tolerance of the registration derivative check.
pub const DERIVATIVE_TOL: f64 = 1e-6;

impl RegisteredLagrangian {
    pub fn register(lag: Arc<dyn Lagrangian>, seed: u64) -> Result<RegisteredLagrangian> {
        let (n, d) = (lag.n(), lag.d());
        if n == 0 || d == 0 {
            return Err(Error::InvalidDimension("Lagrangian needs n, d ≥ 1".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = 1e-5;
        let mut worst: f64 = 0.0;
        let (mut gy, mut gp) = (vec![0.0; d * n], vec![0.0; d * n]);
        let (mut up, mut dn) = (vec![0.0; d], vec![0.0; d]);
        for _ in 0..16 {
            let t: f64 = rng.gen_range(0.0..1.0);
            let y: Point = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let p: Point = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
            lag.grad_y(t, &y, &p, &mut gy);
            lag.grad_p(t, &y, &p, &mut gp);
            for j in 0..n {
                for (which, analytic) in [(0, &gy), (1, &gp)] {
                    let (mut yp, mut pp) = (y.clone(), p.clone());
                    let (mut ym, mut pm) = (y.clone(), p.clone());
                    if which == 0 {
                        yp[j] += h;
                        ym[j] -= h;
                    } else {
                        pp[j] += h;
                        pm[j] -= h;
                    }
                    lag.value(t, &yp, &pp, &mut up);
                    lag.value(t, &ym, &pm, &mut dn);
                    for r in 0..d {
                        let fd = (up[r] - dn[r]) / (2.0 * h);
                        let a = analytic[r * n + j];
                        worst = worst.max((a - fd).abs() / a.abs().max(fd.abs()).max(1.0));
                    }
                }
            }
        }
        if worst.is_nan() || worst > DERIVATIVE_TOL {
            return Err(Error::DerivativeCheck(format!(
                "analytic derivatives deviate from central differences by {worst:.3e} (relative)"
            )));
        }
        Ok(RegisteredLagrangian { inner: lag, max_relative_error: worst })
    }

    pub fn lagrangian(&self) -> &dyn Lagrangian {
        self.inner.as_ref()
    }

    pub fn n(&self) -> usize {
        self.inner.n()
    }

    pub fn d(&self) -> usize {
        self.inner.d()
    }

    pub fn max_relative_error(&self) -> f64 {
        self.max_relative_error
    }
}

/// Fixed endpoint data of the problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Boundary {
    pub a: f64,
    pub b: f64,
    #[serde(rename = "A")]
    pub start: Point,
    #[serde(rename = "B")]
    pub end: Point,
}

impl Boundary {
    pub fn validate(&self, n: usize) -> Result<()> {
        if self.a.is_nan() || self.b.is_nan() || self.a >= self.b {
            return Err(Error::InvalidInput("need a < b".into()));
        }
        if self.start.len() != n || self.end.len() != n {
            return Err(Error::InvalidDimension(format!("boundary values must have dimension {n}")));
        }
        Ok(())
    }
}

/// A discrete arc: `N + 1` uniform nodes, each holding a state in `Rⁿ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscreteArc {
    pub a: f64,
    pub b: f64,
    pub states: Vec<Point>,
}

impl DiscreteArc {
    /// The linear interpolant of the boundary values.
    pub fn linear(boundary: &Boundary, mesh: usize) -> Result<DiscreteArc> {
        if mesh == 0 {
            return Err(Error::InvalidInput("mesh needs N ≥ 1".into()));
        }
        boundary.validate(boundary.start.len())?;
        let states = (0..=mesh)
            .map(|i| {
                let s = i as f64 / mesh as f64;
                boundary.start.iter().zip(&boundary.end).map(|(a, b)| a + s * (b - a)).collect()
            })
            .collect();
        Ok(DiscreteArc { a: boundary.a, b: boundary.b, states })
    }

    pub fn from_fn(boundary: &Boundary, mesh: usize, x: impl Fn(f64) -> Point) -> Result<DiscreteArc> {
        let mut arc = DiscreteArc::linear(boundary, mesh)?;
        for i in 1..mesh {
            arc.states[i] = x(arc.time(i));
        }
        Ok(arc)
    }

    pub fn mesh(&self) -> usize {
        self.states.len() - 1
    }

    pub fn n(&self) -> usize {
        self.states[0].len()
    }

    pub fn h(&self) -> f64 {
        (self.b - self.a) / self.mesh() as f64
    }

    pub fn time(&self, i: usize) -> f64 {
        self.a + i as f64 * self.h()
    }

    /// `self + u`; endpoints are unchanged since test directions vanish there.
    pub fn perturbed(&self, u: &TestDirection, scale: f64) -> DiscreteArc {
        let mut out = self.clone();
        for (x, v) in out.states.iter_mut().zip(&u.values) {
            for (xi, vi) in x.iter_mut().zip(v) {
                *xi += scale * vi;
            }
        }
        out
    }

    /// Sup-norm distance between nodal values.
    pub fn distance(&self, other: &DiscreteArc) -> f64 {
        self.states.iter().zip(&other.states).map(|(a, b)| crate::linalg::dist_inf(a, b)).fold(0.0, f64::max)
    }

    /// `other − self` as a test direction, when both share endpoints.
    pub fn difference(&self, other: &DiscreteArc) -> Option<TestDirection> {
        let values: Vec<Point> = self.states.iter().zip(&other.states).map(|(a, b)| crate::linalg::sub(b, a)).collect();
        TestDirection::new(values).ok()
    }
}

/// A nodal perturbation with vanishing first and last rows.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestDirection {
    pub values: Vec<Point>,
}

impl TestDirection {
    pub fn new(values: Vec<Point>) -> Result<TestDirection> {
        let ok = values.len() >= 2
            && values.first().unwrap().iter().all(|v| *v == 0.0)
            && values.last().unwrap().iter().all(|v| *v == 0.0);
        if !ok {
            return Err(Error::InvalidInput("test directions must vanish at both endpoints".into()));
        }
        Ok(TestDirection { values })
    }

    pub fn zero(mesh: usize, n: usize) -> TestDirection {
        TestDirection { values: vec![vec![0.0; n]; mesh + 1] }
    }

    /// Independent uniform interior values in `[-1, 1]`.
    pub fn random(mesh: usize, n: usize, rng: &mut ChaCha8Rng) -> TestDirection {
        let mut u = TestDirection::zero(mesh, n);
        for row in &mut u.values[1..mesh] {
            row.iter_mut().for_each(|v| *v = rng.gen_range(-1.0..1.0));
        }
        u
    }

    /// Piecewise-linear interpolation of random values on `knots` interior
    /// knots.
    pub fn coarse(mesh: usize, n: usize, knots: usize, rng: &mut ChaCha8Rng) -> TestDirection {
        let mut kv: Vec<Point> = vec![vec![0.0; n]];
        for _ in 0..knots {
            kv.push((0..n).map(|_| rng.gen_range(-1.0..1.0)).collect());
        }
        kv.push(vec![0.0; n]);
        let mut u = TestDirection::zero(mesh, n);
        for i in 1..mesh {
            let s = i as f64 / mesh as f64 * (knots + 1) as f64;
            let k = (s.floor() as usize).min(knots);
            let w = s - k as f64;
            for j in 0..n {
                u.values[i][j] = (1.0 - w) * kv[k][j] + w * kv[k + 1][j];
            }
        }
        u
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| crate::linalg::norm_inf(v)).fold(0.0, f64::max)
    }

    pub fn normalized(&self) -> TestDirection {
        let s = self.sup_norm();
        if s == 0.0 {
            return self.clone();
        }
        TestDirection { values: self.values.iter().map(|v| v.iter().map(|x| x / s).collect()).collect() }
    }
}

struct Interval {
    t: f64,
    y: Point,
    p: Point,
}

fn intervals(arc: &DiscreteArc) -> impl Iterator<Item = Interval> + '_ {
    let h = arc.h();
    arc.states.windows(2).enumerate().map(move |(i, w)| Interval {
        t: arc.time(i) + 0.5 * h,
        y: w[0].iter().zip(&w[1]).map(|(a, b)| 0.5 * (a + b)).collect(),
        p: w[0].iter().zip(&w[1]).map(|(a, b)| (b - a) / h).collect(),
    })
}

/// `F(x)` by the midpoint scheme.
pub fn objective(lag: &RegisteredLagrangian, arc: &DiscreteArc) -> Point {
    let l = lag.lagrangian();
    let h = arc.h();
    let mut total = vec![0.0; l.d()];
    let mut buf = vec![0.0; l.d()];
    for iv in intervals(arc) {
        l.value(iv.t, &iv.y, &iv.p, &mut buf);
        for (s, v) in total.iter_mut().zip(&buf) {
            *s += h * v;
        }
    }
    total
}

/// `ζᵀ ∂L/∂y` and `ζᵀ ∂L/∂p` on every interval.
fn weighted_partials(lag: &dyn Lagrangian, zeta: &[f64], arc: &DiscreteArc) -> Vec<(Point, Point)> {
    let (n, d) = (lag.n(), lag.d());
    let (mut gy, mut gp) = (vec![0.0; d * n], vec![0.0; d * n]);
    intervals(arc)
        .map(|iv| {
            lag.grad_y(iv.t, &iv.y, &iv.p, &mut gy);
            lag.grad_p(iv.t, &iv.y, &iv.p, &mut gp);
            let contract =
                |g: &[f64]| -> Point { (0..n).map(|j| (0..d).map(|r| zeta[r] * g[r * n + j]).sum()).collect() };
            (contract(&gy), contract(&gp))
        })
        .collect()
}

/// Gradient of `ζᵀF` with respect to the nodal states; endpoint rows are 0.
pub fn scalarized_gradient(lag: &RegisteredLagrangian, zeta: &[f64], arc: &DiscreteArc) -> Vec<Point> {
    let h = arc.h();
    let n = arc.n();
    let partials = weighted_partials(lag.lagrangian(), zeta, arc);
    let mut g = vec![vec![0.0; n]; arc.states.len()];
    for (i, (gy, gp)) in partials.iter().enumerate() {
        for j in 0..n {
            let y_part = 0.5 * h * gy[j];
            g[i][j] += y_part - gp[j];
            g[i + 1][j] += y_part + gp[j];
        }
    }
    let last = g.len() - 1;
    g[0].fill(0.0);
    g[last].fill(0.0);
    g
}

fn scalar_value(lag: &RegisteredLagrangian, zeta: &[f64], arc: &DiscreteArc) -> f64 {
    dot(zeta, &objective(lag, arc))
}

/// Largest relative deviation between the assembled gradient and central
/// differences of `ζᵀF` over interior states.
pub fn gradient_check(lag: &RegisteredLagrangian, zeta: &[f64], arc: &DiscreteArc) -> f64 {
    let g = scalarized_gradient(lag, zeta, arc);
    let step = 1e-6;
    let mut worst: f64 = 0.0;
    let mut work = arc.clone();
    for i in 1..arc.mesh() {
        for j in 0..arc.n() {
            let orig = work.states[i][j];
            work.states[i][j] = orig + step;
            let up = scalar_value(lag, zeta, &work);
            work.states[i][j] = orig - step;
            let dn = scalar_value(lag, zeta, &work);
            work.states[i][j] = orig;
            let fd = (up - dn) / (2.0 * step);
            let scale = g[i][j].abs().max(fd.abs()).max(1e-3);
            worst = worst.max((g[i][j] - fd).abs() / scale);
        }
    }
    worst
}

/// `max_u |Σ_i h [ζᵀ∂_yL · ū_i + ζᵀ∂_pL · u̇_i]|` over test directions
/// normalized to sup-norm 1, with `ū_i`, `u̇_i` the interval average and
/// difference quotient of `u`.
pub fn first_order_residual(
    lag: &RegisteredLagrangian,
    zeta: &[f64],
    arc: &DiscreteArc,
    dirs: &[TestDirection],
) -> f64 {
    let h = arc.h();
    let partials = weighted_partials(lag.lagrangian(), zeta, arc);
    dirs.iter()
        .map(|u| {
            let u = u.normalized();
            let mut s = 0.0;
            for (i, (gy, gp)) in partials.iter().enumerate() {
                let (a, b) = (&u.values[i], &u.values[i + 1]);
                for j in 0..gy.len() {
                    s += h * (gy[j] * 0.5 * (a[j] + b[j]) + gp[j] * (b[j] - a[j]) / h);
                }
            }
            s.abs()
        })
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CvpOptions {
    pub grad_tol: f64,
    pub max_iter: usize,
    pub seed: u64,
    /// Random test directions for the first-order residual.
    pub test_directions: usize,
    /// Perturbations used in the `φ̂(u; M) ≥ φ̂(0; M)` check.
    pub probes: usize,
    pub probe_tol: f64,
    pub residual_tol: f64,
}

impl Default for CvpOptions {
    fn default() -> Self {
        CvpOptions {
            grad_tol: 1e-11,
            max_iter: 200_000,
            seed: 0,
            test_directions: 20,
            probes: 24,
            probe_tol: 1e-4,
            residual_tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveOutcome {
    pub arc: DiscreteArc,
    pub iterations: usize,
    pub gradient_norm: f64,
    pub converged: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub flag: Option<String>,
}

fn sup(g: &[Point]) -> f64 {
    g.iter().map(|v| crate::linalg::norm_inf(v)).fold(0.0, f64::max)
}

fn inner(a: &[Point], b: &[Point]) -> f64 {
    a.iter().zip(b).map(|(x, y)| dot(x, y)).sum()
}

/// Minimizes `ζᵀF` over arcs with the given endpoints by gradient descent
/// with Barzilai–Borwein trial steps and nonmonotone backtracking.
pub fn solve_sccvp(
    lag: &RegisteredLagrangian,
    zeta: &[f64],
    boundary: &Boundary,
    mesh: usize,
    opts: &CvpOptions,
) -> Result<SolveOutcome> {
    if zeta.len() != lag.d() || zeta.iter().any(|z| *z < -TOL_GEOM) || zeta.iter().all(|z| z.abs() <= TOL_GEOM) {
        return Err(Error::InvalidDirection(zeta.to_vec()));
    }
    boundary.validate(lag.n())?;
    let mut x = DiscreteArc::linear(boundary, mesh)?;
    let mut fx = scalar_value(lag, zeta, &x);
    let mut g = scalarized_gradient(lag, zeta, &x);
    let mut history = vec![fx];
    let mut step = 1.0 / (1.0 + sup(&g));
    let mut iterations = 0;
    let mut flag = None;
    while sup(&g) > opts.grad_tol {
        if iterations >= opts.max_iter {
            flag = Some("iteration limit reached".to_string());
            break;
        }
        iterations += 1;
        let gg = inner(&g, &g);
        let reference = history.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let slack = 1e-15 * reference.abs().max(1.0);
        let mut s = step;
        let mut accepted = None;
        for _ in 0..60 {
            let mut trial = x.clone();
            for (row, gr) in trial.states.iter_mut().zip(&g) {
                for (xi, gi) in row.iter_mut().zip(gr) {
                    *xi -= s * gi;
                }
            }
            let ft = scalar_value(lag, zeta, &trial);
            if ft.is_finite() && ft <= reference - 1e-4 * s * gg + slack {
                accepted = Some((trial, ft));
                break;
            }
            s *= 0.5;
        }
        let Some((next, fnext)) = accepted else {
            flag = Some("line search failed".to_string());
            break;
        };
        let gnext = scalarized_gradient(lag, zeta, &next);
        let dx: Vec<Point> = next.states.iter().zip(&x.states).map(|(a, b)| crate::linalg::sub(a, b)).collect();
        let dg: Vec<Point> = gnext.iter().zip(&g).map(|(a, b)| crate::linalg::sub(a, b)).collect();
        let curvature = inner(&dx, &dg);
        step = if curvature > 0.0 { inner(&dx, &dx) / curvature } else { 2.0 * s };
        x = next;
        fx = fnext;
        g = gnext;
        history.push(fx);
        if history.len() > 10 {
            history.remove(0);
        }
    }
    let gradient_norm = sup(&g);
    if flag.is_none() && oscillates(&x) {
        flag = Some("no attained minimizer: the discrete velocity oscillates".to_string());
    }
    Ok(SolveOutcome { arc: x, iterations, gradient_norm, converged: flag.is_none(), flag })
}

/// Sign changes of the discrete velocity at more than a quarter of the
/// nodes: the stationary point is a grid-scale oscillation rather than the
/// discretization of a smooth arc.
fn oscillates(arc: &DiscreteArc) -> bool {
    let m = arc.mesh();
    if m < 4 {
        return false;
    }
    let scale = arc.states.iter().map(|v| crate::linalg::norm_inf(v)).fold(0.0, f64::max).max(1e-300);
    let mut changes = 0;
    for j in 0..arc.n() {
        let vel: Vec<f64> = arc.states.windows(2).map(|w| w[1][j] - w[0][j]).collect();
        changes += vel.windows(2).filter(|w| w[0] * w[1] < 0.0 && w[0].abs().min(w[1].abs()) > 1e-9 * scale).count();
    }
    changes * 4 > m * arc.n()
}

/// Result for one direction of a CVP sweep.
#[derive(Debug, Clone, Serialize)]
pub struct CvpDirection {
    pub zeta: Point,
    pub weights: Point,
    pub objective: Point,
    pub iterations: usize,
    pub gradient_norm: f64,
    pub converged: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub flag: Option<String>,
    pub first_order_residual: f64,
    pub gradient_check: f64,
    /// `min_u φ̂(u; M) − φ̂(0; M)` over the probe perturbations.
    pub probe_slack: f64,
    pub probe_pass: bool,
    #[serde(skip)]
    pub arc: DiscreteArc,
}

#[derive(Debug, Clone, Serialize)]
pub struct CvpReport {
    pub boundary: Boundary,
    pub mesh: usize,
    pub options: CvpOptions,
    pub derivative_check_error: f64,
    pub probe_family: String,
    pub directions: Vec<CvpDirection>,
    pub all_converged: bool,
    pub all_pass: bool,
}

impl CvpReport {
    pub fn exit_code(&self) -> i32 {
        if self.all_converged && self.all_pass {
            0
        } else {
            2
        }
    }

    /// The discrete weakly efficient front `{F(x_ζ)}`.
    pub fn front(&self) -> Vec<Point> {
        self.directions.iter().map(|d| d.objective.clone()).collect()
    }
}

/// The seeded perturbations `u` of the `φ̂(u; M) ≥ φ̂(0; M)` check: random
/// nodal and coarse piecewise-linear directions at amplitudes `10⁻³…10⁻¹`.
pub fn probe_perturbations(mesh: usize, n: usize, count: usize, seed: u64) -> Vec<(TestDirection, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xc0a_75e);
    let amplitudes = [1e-3, 1e-2, 1e-1];
    (0..count)
        .map(|k| {
            let u = if k % 2 == 0 {
                TestDirection::random(mesh, n, &mut rng)
            } else {
                let knots = rng.gen_range(1..=6);
                TestDirection::coarse(mesh, n, knots, &mut rng)
            };
            (u, amplitudes[k % amplitudes.len()])
        })
        .collect()
}

/// Solves every base direction, collects the arcs as `M` and checks
/// first-order stationarity and minimality of `φ̂_{f,ζ}(·; M)` at `0`.
pub fn cvp_sweep(
    lag: &RegisteredLagrangian,
    base: &DualBase,
    boundary: &Boundary,
    mesh: usize,
    opts: &CvpOptions,
) -> Result<CvpReport> {
    if base.cone().dim() != lag.d() {
        return Err(Error::InvalidDimension("base and Lagrangian disagree on d".into()));
    }
    boundary.validate(lag.n())?;
    let solved =
        base.directions().par_iter().map(|z| solve_sccvp(lag, z, boundary, mesh, opts)).collect::<Result<Vec<_>>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let tests: Vec<TestDirection> =
        (0..opts.test_directions).map(|_| TestDirection::random(mesh, lag.n(), &mut rng)).collect();
    let probes = probe_perturbations(mesh, lag.n(), opts.probes, opts.seed);
    let arcs: Vec<&DiscreteArc> = solved.iter().map(|s| &s.arc).collect();
    let directions = base
        .directions()
        .par_iter()
        .zip(base.weights().par_iter())
        .zip(solved.par_iter())
        .map(|((z, w), s)| {
            let at_zero = arcs.iter().map(|a| scalar_value(lag, z, a)).fold(f64::INFINITY, f64::min);
            let mut slack = f64::INFINITY;
            for (u, amp) in &probes {
                let shifted =
                    arcs.iter().map(|a| scalar_value(lag, z, &a.perturbed(u, *amp))).fold(f64::INFINITY, f64::min);
                slack = slack.min(shifted - at_zero);
            }
            CvpDirection {
                zeta: z.clone(),
                weights: w.clone(),
                objective: objective(lag, &s.arc),
                iterations: s.iterations,
                gradient_norm: s.gradient_norm,
                converged: s.converged,
                flag: s.flag.clone(),
                first_order_residual: first_order_residual(lag, z, &s.arc, &tests),
                gradient_check: gradient_check(lag, z, &s.arc),
                probe_slack: slack,
                probe_pass: slack >= -opts.probe_tol,
                arc: s.arc.clone(),
            }
        })
        .collect::<Vec<_>>();
    let all_converged = directions.iter().all(|d| d.converged);
    let all_pass = directions.iter().all(|d| d.probe_pass && d.first_order_residual <= opts.residual_tol);
    Ok(CvpReport {
        boundary: boundary.clone(),
        mesh,
        options: *opts,
        derivative_check_error: lag.max_relative_error(),
        probe_family: format!(
            "{} seeded perturbations (alternating random nodal and coarse piecewise-linear) at amplitudes 1e-3, 1e-2, 1e-1",
            opts.probes
        ),
        directions,
        all_converged,
        all_pass,
    })
}

/// The CVP problem file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvpProblem {
    pub a: f64,
    pub b: f64,
    #[serde(rename = "A")]
    pub start: Point,
    #[serde(rename = "B")]
    pub end: Point,
    pub n: usize,
    pub d: usize,
    #[serde(rename = "N")]
    pub mesh: usize,
    pub lagrangian: LagrangianSpec,
}

impl CvpProblem {
    /// `quadratic_cvp` with `A = 0`, `B = 1` on `[0, 1]`.
    pub fn quadratic_default(mesh: usize) -> CvpProblem {
        CvpProblem {
            a: 0.0,
            b: 1.0,
            start: vec![0.0],
            end: vec![1.0],
            n: 1,
            d: 2,
            mesh,
            lagrangian: LagrangianSpec { catalog: "quadratic_cvp".into(), params: Default::default() },
        }
    }

    pub fn boundary(&self) -> Boundary {
        Boundary { a: self.a, b: self.b, start: self.start.clone(), end: self.end.clone() }
    }

    pub fn build(&self, seed: u64) -> Result<(RegisteredLagrangian, Boundary, Cone)> {
        let lag = self.lagrangian.build(self.n)?;
        if lag.d() != self.d || lag.n() != self.n {
            return Err(Error::InvalidDimension(format!(
                "Lagrangian has n = {}, d = {}, problem declares n = {}, d = {}",
                lag.n(),
                lag.d(),
                self.n,
                self.d
            )));
        }
        let boundary = self.boundary();
        boundary.validate(self.n)?;
        if self.mesh == 0 {
            return Err(Error::InvalidInput("N must be positive".into()));
        }
        Ok((RegisteredLagrangian::register(lag, seed)?, boundary, Cone::orthant(self.d)?))
    }
}

/// `x(t) = sinh(k t) / sinh(k)` with `k² = (1 − α)/α`, the minimizer of
/// `α ∫ẋ² + (1 − α) ∫x²` with `x(0) = 0`, `x(1) = 1`; `x(t) = t` at `α = 1`.
pub fn sinh_oracle(alpha: f64, t: f64) -> f64 {
    let k = ((1.0 - alpha) / alpha).sqrt();
    if k == 0.0 {
        t
    } else {
        (k * t).sinh() / k.sinh()
    }
}

/// `(∫ẋ², ∫x²)` of the oracle arc in closed form.
pub fn sinh_front(alpha: f64) -> Point {
    let k = ((1.0 - alpha) / alpha).sqrt();
    if k == 0.0 {
        return vec![1.0, 1.0 / 3.0];
    }
    let s = k.sinh();
    let tail = (2.0 * k).sinh() / (4.0 * k);
    vec![k * k * (0.5 + tail) / (s * s), (tail - 0.5) / (s * s)]
}
