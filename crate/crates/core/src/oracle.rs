//! Brute-force ground truth on finite planar instances.
//!
//! Inf-translations are recomputed here from an explicit translation table
//! (`x + g_j` looked up on the grid) without going through
//! [`SetFunction::inf_translate`], so the two implementations check each
//! other.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cone::{Cone, ConeSpec, TOL_GEOM};
use crate::error::{Error, Result};
use crate::gset::{lattice_inf, GValue};
use crate::linalg::{add, dist_inf, norm_inf, sub, Point};
use crate::setfn::{CandidateSet, SetFunction, GRID_TOL};

/// Supersets are enumerated exhaustively up to this grid size.
pub const POWER_SET_LIMIT: usize = 12;

/// Sampled supersets when the grid is too large for the power set.
const SAMPLED_SUPERSETS: usize = 32;

/// Absolute tolerance of the lattice comparisons on finite instances.
pub const ORACLE_TOL: f64 = 1e-9;

/// One grid point and the generators of its value (`[]` for `∅`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableEntry {
    pub x: Point,
    pub generators: Vec<Point>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InstanceJson {
    pub cone: ConeSpec,
    pub table: Vec<TableEntry>,
}

/// A finite instance of the problem: a grid and one value per grid point.
#[derive(Debug, Clone)]
pub struct FiniteInstance {
    cone: Arc<Cone>,
    grid: Vec<Point>,
    values: Vec<GValue>,
}

impl FiniteInstance {
    pub fn new(cone: Arc<Cone>, grid: Vec<Point>, values: Vec<GValue>) -> Result<FiniteInstance> {
        if cone.dim() != 2 {
            return Err(Error::InvalidDimension(format!("oracle instances need d = 2, got {}", cone.dim())));
        }
        if grid.len() != values.len() {
            return Err(Error::InvalidInput("grid and values differ in length".into()));
        }
        crate::setfn::VarSpace::new_grid(grid.clone())?;
        if values.iter().any(|v| **v.cone() != *cone) {
            return Err(Error::IncompatibleCone);
        }
        Ok(FiniteInstance { cone, grid, values })
    }

    pub fn from_json(json: &InstanceJson) -> Result<FiniteInstance> {
        let cone = Arc::new(json.cone.build()?);
        let grid = json.table.iter().map(|e| e.x.clone()).collect();
        let values =
            json.table.iter().map(|e| GValue::new(cone.clone(), e.generators.clone())).collect::<Result<Vec<_>>>()?;
        FiniteInstance::new(cone, grid, values)
    }

    pub fn to_json(&self) -> InstanceJson {
        InstanceJson {
            cone: self.cone.spec(),
            table: self
                .grid
                .iter()
                .zip(&self.values)
                .map(|(x, v)| TableEntry { x: x.clone(), generators: v.generators().to_vec() })
                .collect(),
        }
    }

    /// Tabulates a set function on its grid.
    pub fn from_function(f: &SetFunction) -> Result<FiniteInstance> {
        let crate::setfn::VarSpace::Grid(grid) = f.space() else {
            return Err(Error::InvalidSpace("oracle instances need a grid space".into()));
        };
        let values = grid.iter().map(|x| f.eval(x)).collect::<Result<Vec<_>>>()?;
        FiniteInstance::new(f.cone().clone(), grid.clone(), values)
    }

    pub fn cone(&self) -> &Arc<Cone> {
        &self.cone
    }

    pub fn grid(&self) -> &[Point] {
        &self.grid
    }

    pub fn values(&self) -> &[GValue] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn to_function(&self) -> Result<SetFunction> {
        SetFunction::table(self.grid.clone(), self.values.clone(), self.cone.clone())
    }

    pub fn index_of(&self, x: &[f64]) -> Option<usize> {
        let tol = GRID_TOL * (1.0 + norm_inf(x));
        self.grid.iter().position(|g| dist_inf(g, x) <= tol)
    }

    pub fn indices_of(&self, points: &[Point]) -> Result<Vec<usize>> {
        points.iter().map(|p| self.index_of(p).ok_or_else(|| Error::OutOfDomain(p.clone()))).collect()
    }

    pub fn points_of(&self, idx: &[usize]) -> Vec<Point> {
        idx.iter().map(|&i| self.grid[i].clone()).collect()
    }
}

/// The translations `x = g_i - g_j` with the grid lookup of every `x + g_k`.
struct Translations {
    xs: Vec<Point>,
    zero: usize,
    /// `shift[t][k]`: grid index of `xs[t] + g_k`.
    shift: Vec<Vec<Option<usize>>>,
}

impl Translations {
    fn new(inst: &FiniteInstance) -> Translations {
        let mut xs: Vec<Point> = vec![vec![0.0; inst.grid[0].len()]];
        for g in &inst.grid {
            for h in &inst.grid {
                let x = sub(g, h);
                if xs.iter().all(|q| dist_inf(q, &x) > GRID_TOL * (1.0 + norm_inf(&x))) {
                    xs.push(x);
                }
            }
        }
        let shift = xs.iter().map(|x| inst.grid.iter().map(|g| inst.index_of(&add(x, g))).collect()).collect();
        Translations { xs, zero: 0, shift }
    }

    /// Generators of `f̂(x_t; set)`.
    fn generators(&self, inst: &FiniteInstance, t: usize, set: &[usize]) -> Vec<Point> {
        set.iter().filter_map(|&k| self.shift[t][k]).flat_map(|i| inst.values[i].generators().iter().cloned()).collect()
    }
}

fn value_of(inst: &FiniteInstance, generators: Vec<Point>) -> Result<GValue> {
    Ok(GValue::new(inst.cone.clone(), generators)?.prune())
}

/// The infimum over a subset in `G` (convex hull of the union) together with
/// the plain union of generators, which is all the infimum in the lattice of
/// upper sets without convexification would retain.
pub fn exact_inf(inst: &FiniteInstance, subset: &[usize]) -> Result<(GValue, Vec<Point>)> {
    if subset.is_empty() {
        return Err(Error::EmptyFamily);
    }
    let family: Vec<GValue> = subset.iter().map(|&i| inst.values[i].clone()).collect();
    let mut union: Vec<Point> = Vec::new();
    for v in &family {
        for g in v.generators() {
            if !union.contains(g) {
                union.push(g.clone());
            }
        }
    }
    Ok((lattice_inf(&family)?, union))
}

/// Grid indices `x̄` such that no `f(x)` strictly contains `f(x̄)`.
pub fn enumerate_lattice_minimizers(inst: &FiniteInstance) -> Result<Vec<usize>> {
    let n = inst.len();
    let flags = (0..n)
        .into_par_iter()
        .map(|i| {
            for j in 0..n {
                let (a, b) = (&inst.values[j], &inst.values[i]);
                if a.order_geq(b, ORACLE_TOL)? && !a.equals(b, ORACLE_TOL)? {
                    return Ok(false);
                }
            }
            Ok(true)
        })
        .collect::<Result<Vec<bool>>>()?;
    Ok((0..n).filter(|&i| flags[i]).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Clause {
    pub holds: bool,
    pub checked: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

impl Clause {
    fn new() -> Clause {
        Clause { holds: true, checked: 0, witness: None }
    }

    fn record(&mut self, ok: bool, witness: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok && self.holds {
            self.holds = false;
            self.witness = Some(witness());
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LemmaReport {
    /// Antitonicity `f̂(x; N) ⊇ f̂(x; M)` at every translation.
    pub a: Clause,
    /// `inf f = inf_x f̂(x; M)` over all translations.
    pub b: Clause,
    /// `M` is an infimizer of `f`.
    pub c1: Clause,
    /// `{0}` is an infimizer of `f̂(·; M)`.
    pub c2: Clause,
    /// `f̂(0; M) = f̂(0; N)` for the tested supersets `N`.
    pub c3: Clause,
    /// `{0}` is an infimizer of `f̂(·; N)` for the tested supersets `N`.
    pub c4: Clause,
    /// `true` when `c3` and `c4` ranged over every superset of `M`.
    pub exhaustive_supersets: bool,
    pub supersets_tested: usize,
    pub equivalent: bool,
    pub passed: bool,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct LemmaOptions {
    pub seed: u64,
    /// Corrupts the `N`-side translations by a shift deep into the cone, so
    /// antitonicity must fail wherever `f̂(x; M)` is nonempty.
    pub inject_fault: bool,
}

/// Checks clauses (a), (b) and the equivalence of (c1)–(c4) for `m ⊆ n`.
pub fn check_inf_translation_lemma(
    inst: &FiniteInstance,
    m: &[usize],
    n: &[usize],
    opts: LemmaOptions,
) -> Result<LemmaReport> {
    if m.is_empty() {
        return Err(Error::EmptyCandidate);
    }
    if m.iter().any(|i| !n.contains(i)) {
        return Err(Error::InvalidInput("m must be a subset of n".into()));
    }
    let tr = Translations::new(inst);
    let all: Vec<usize> = (0..inst.len()).collect();
    let (inf_f, _) = exact_inf(inst, &all)?;
    let fault = opts.inject_fault.then(|| {
        let z = inst.cone.primal_generators().iter().fold(vec![0.0; 2], |acc, g| add(&acc, g));
        crate::linalg::scaled(1e3 * (1.0 + max_coordinate(inst)), &z)
    });
    let hat = |t: usize, set: &[usize], faulty: bool| -> Result<GValue> {
        let mut gens = tr.generators(inst, t, set);
        if let (true, Some(v)) = (faulty, &fault) {
            gens = gens.iter().map(|g| add(g, v)).collect();
        }
        value_of(inst, gens)
    };
    let hat_all = |set: &[usize], faulty: bool| -> Result<GValue> {
        let gens = (0..tr.xs.len()).flat_map(|t| tr.generators(inst, t, set)).collect::<Vec<_>>();
        let mut v = value_of(inst, gens)?;
        if let (true, Some(s)) = (faulty, &fault) {
            v = value_of(inst, v.generators().iter().map(|g| add(g, s)).collect())?;
        }
        Ok(v)
    };

    let mut a = Clause::new();
    for t in 0..tr.xs.len() {
        let vm = hat(t, m, false)?;
        let vn = hat(t, n, true)?;
        a.record(vn.order_geq(&vm, ORACLE_TOL)?, || format!("x = {:?}: f̂(x; N) does not contain f̂(x; M)", tr.xs[t]));
    }

    let mut b = Clause::new();
    let inf_hat = hat_all(m, false)?;
    b.record(inf_hat.equals(&inf_f, ORACLE_TOL)?, || {
        format!("inf f̂(·; M) has generators {:?}, inf f has {:?}", inf_hat.generators(), inf_f.generators())
    });

    let (inf_m, _) = exact_inf(inst, m)?;
    let mut c1 = Clause::new();
    c1.record(inf_m.equals(&inf_f, ORACLE_TOL)?, || {
        let missing = (0..inst.len())
            .find(|&i| !inf_m.order_geq(&inst.values[i], ORACLE_TOL).unwrap_or(false))
            .map(|i| format!("{:?}", inst.grid[i]))
            .unwrap_or_else(|| "?".into());
        format!("f at {missing} is not covered by inf over M")
    });

    let hat0_m = hat(tr.zero, m, false)?;
    let mut c2 = Clause::new();
    c2.record(hat0_m.equals(&inf_hat, ORACLE_TOL)?, || "f̂(0; M) differs from inf_x f̂(x; M)".to_string());

    let (supersets, exhaustive) = supersets(inst.len(), m, n, opts.seed);
    let mut c3 = Clause::new();
    let mut c4 = Clause::new();
    for s in &supersets {
        let hat0_n = hat(tr.zero, s, false)?;
        c3.record(hat0_m.equals(&hat0_n, ORACLE_TOL)?, || {
            format!("N = {:?}: f̂(0; N) differs from f̂(0; M)", inst.points_of(s))
        });
        let inf_n = hat_all(s, false)?;
        c4.record(hat0_n.equals(&inf_n, ORACLE_TOL)?, || {
            format!("N = {:?}: {{0}} is not an infimizer of f̂(·; N)", inst.points_of(s))
        });
    }

    let equivalent = c1.holds == c2.holds && c2.holds == c3.holds && c3.holds == c4.holds;
    let passed = a.holds && b.holds && equivalent;
    Ok(LemmaReport {
        a,
        b,
        c1,
        c2,
        c3,
        c4,
        exhaustive_supersets: exhaustive,
        supersets_tested: supersets.len(),
        equivalent,
        passed,
    })
}

fn max_coordinate(inst: &FiniteInstance) -> f64 {
    inst.values.iter().flat_map(|v| v.generators().iter().map(|g| norm_inf(g))).fold(0.0, f64::max)
}

/// All supersets of `m` for small grids; otherwise `n`, the whole grid and
/// seeded random supersets.
fn supersets(size: usize, m: &[usize], n: &[usize], seed: u64) -> (Vec<Vec<usize>>, bool) {
    let rest: Vec<usize> = (0..size).filter(|i| !m.contains(i)).collect();
    if size <= POWER_SET_LIMIT {
        let out = (0..1usize << rest.len())
            .map(|mask| {
                let mut s = m.to_vec();
                s.extend(rest.iter().enumerate().filter(|(b, _)| mask >> b & 1 == 1).map(|(_, &i)| i));
                s
            })
            .collect();
        return (out, true);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = vec![n.to_vec(), (0..size).collect()];
    for _ in 0..SAMPLED_SUPERSETS {
        let mut s = m.to_vec();
        s.extend(rest.iter().filter(|_| rng.gen_bool(0.5)));
        out.push(s);
    }
    (out, false)
}

/// `max |φ_{f̂(·;M),z*}(x) − min_{y ∈ M} φ_{f,z*}(x + y)|` over all
/// translations and directions. The left side goes through
/// [`SetFunction::inf_translate`], the right side through the grid table.
pub fn check_commutation(inst: &FiniteInstance, m: &[usize], directions: &[Point]) -> Result<f64> {
    for z in directions {
        if !inst.cone.dual_contains(z, TOL_GEOM) {
            return Err(Error::InvalidDirection(z.clone()));
        }
    }
    let f = inst.to_function()?;
    let cand = CandidateSet::new(inst.points_of(m))?;
    let hat = f.inf_translate(&cand)?;
    let tr = Translations::new(inst);
    let mut worst: f64 = 0.0;
    for t in 0..tr.xs.len() {
        let value = hat.eval_or_empty(&tr.xs[t])?;
        for z in directions {
            let lhs = value.support(z)?;
            let mut rhs = f64::INFINITY;
            for &k in m {
                if let Some(i) = tr.shift[t][k] {
                    rhs = rhs.min(inst.values[i].support(z)?.value());
                }
            }
            let gap = match (lhs.is_finite(), rhs.is_finite()) {
                (true, true) => (lhs.value() - rhs).abs(),
                (false, false) if lhs.value() == rhs => 0.0,
                _ => f64::INFINITY,
            };
            worst = worst.max(gap);
        }
    }
    Ok(worst)
}

/// Parameters of the seeded random instance generator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CampaignSpec {
    pub instances: usize,
    pub seed: u64,
    pub max_points: usize,
    pub max_generators: usize,
    pub empty_probability: f64,
}

impl Default for CampaignSpec {
    fn default() -> Self {
        CampaignSpec { instances: 200, seed: 7, max_points: 20, max_generators: 5, empty_probability: 0.15 }
    }
}

/// A random instance with its candidate set `M` and a superset `N`.
#[derive(Debug, Clone)]
pub struct RandomCase {
    pub instance: FiniteInstance,
    pub m: Vec<usize>,
    pub n: Vec<usize>,
}

fn skewed_cone() -> Cone {
    Cone::generated(vec![vec![2.0, -1.0], vec![-1.0, 2.0]], vec![vec![1.0, 2.0], vec![2.0, 1.0]]).expect("valid cone")
}

/// Integer grid points in `[-3, 3]^n` (`n ∈ {1, 2}`), values with up to
/// `max_generators` integer generators in `[-5, 5]²` or `∅`, on the
/// nonnegative orthant or a skewed cone.
pub fn random_case(rng: &mut ChaCha8Rng, spec: &CampaignSpec) -> Result<RandomCase> {
    let cone = Arc::new(if rng.gen_bool(0.5) { Cone::orthant(2)? } else { skewed_cone() });
    let dim = rng.gen_range(1..=2);
    let count = rng.gen_range(2..=spec.max_points.max(2));
    let mut grid: Vec<Point> = Vec::new();
    let mut attempts = 0;
    while grid.len() < count && attempts < 10_000 {
        attempts += 1;
        let p: Point = (0..dim).map(|_| rng.gen_range(-3..=3) as f64).collect();
        if !grid.contains(&p) {
            grid.push(p);
        }
    }
    let values = grid
        .iter()
        .map(|_| {
            if rng.gen_bool(spec.empty_probability) {
                Ok(GValue::empty(cone.clone()))
            } else {
                let k = rng.gen_range(1..=spec.max_generators.max(1));
                let gens = (0..k).map(|_| vec![rng.gen_range(-5..=5) as f64, rng.gen_range(-5..=5) as f64]).collect();
                GValue::new(cone.clone(), gens)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let size = grid.len();
    let instance = FiniteInstance::new(cone, grid, values)?;
    let mut m: Vec<usize> = (0..size).filter(|_| rng.gen_bool(0.3)).collect();
    if m.is_empty() {
        m.push(rng.gen_range(0..size));
    }
    let mut n = m.clone();
    n.extend((0..size).filter(|i| !m.contains(i) && rng.gen_bool(0.5)));
    Ok(RandomCase { instance, m, n })
}

/// The seeded list of random cases of a campaign.
pub fn campaign_cases(spec: &CampaignSpec) -> Result<Vec<RandomCase>> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    (0..spec.instances).map(|_| random_case(&mut rng, spec)).collect()
}

/// Directions of the dual base with `resolution + 1` entries.
pub fn oracle_directions(cone: &Cone, resolution: usize) -> Result<Vec<Point>> {
    let anchor = cone.default_anchor().ok_or_else(|| Error::InvalidAnchor("cone has no default anchor".into()))?;
    Ok(cone.base_directions(&anchor, resolution)?.directions().to_vec())
}

#[derive(Debug, Clone, Serialize)]
pub struct CaseReport {
    pub index: usize,
    pub points: usize,
    pub m: Vec<Point>,
    pub commutation_gap: f64,
    pub lemma: LemmaReport,
    pub minimizers: Vec<Point>,
    /// Whether the lattice-minimizers generate the infimum (not guaranteed
    /// without compactness, reported only).
    pub minimizers_form_infimizer: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct CampaignReport {
    pub spec: CampaignSpec,
    pub max_commutation_gap: f64,
    pub lemma_failures: Vec<usize>,
    pub minimizer_infimizer_counterexamples: Vec<usize>,
    pub cases: Vec<CaseReport>,
    pub passed: bool,
}

/// Every check on one case.
pub fn check_case(
    index: usize,
    inst: &FiniteInstance,
    m: &[usize],
    n: &[usize],
    opts: LemmaOptions,
    direction_res: usize,
) -> Result<CaseReport> {
    let dirs = oracle_directions(inst.cone(), direction_res)?;
    let commutation_gap = check_commutation(inst, m, &dirs)?;
    let lemma = check_inf_translation_lemma(inst, m, n, opts)?;
    let mins = enumerate_lattice_minimizers(inst)?;
    let all: Vec<usize> = (0..inst.len()).collect();
    let (inf_all, _) = exact_inf(inst, &all)?;
    let (inf_mins, _) = exact_inf(inst, &mins)?;
    Ok(CaseReport {
        index,
        points: inst.len(),
        m: inst.points_of(m),
        commutation_gap,
        lemma,
        minimizers: inst.points_of(&mins),
        minimizers_form_infimizer: inf_mins.equals(&inf_all, ORACLE_TOL)?,
    })
}

/// Runs a seeded campaign; passes iff every lemma check passes and the
/// largest commutation gap is at most `1e-12`.
pub fn run_campaign(spec: &CampaignSpec, opts: LemmaOptions) -> Result<CampaignReport> {
    let cases = campaign_cases(spec)?;
    let reports = cases
        .par_iter()
        .enumerate()
        .map(|(i, c)| {
            let o = LemmaOptions { seed: opts.seed ^ i as u64, ..opts };
            check_case(i, &c.instance, &c.m, &c.n, o, 16)
        })
        .collect::<Result<Vec<_>>>()?;
    let max_commutation_gap = reports.iter().map(|r| r.commutation_gap).fold(0.0, f64::max);
    let lemma_failures: Vec<usize> = reports.iter().filter(|r| !r.lemma.passed).map(|r| r.index).collect();
    let counter = reports.iter().filter(|r| !r.minimizers_form_infimizer).map(|r| r.index).collect();
    Ok(CampaignReport {
        spec: *spec,
        max_commutation_gap,
        passed: lemma_failures.is_empty() && max_commutation_gap <= 1e-12,
        lemma_failures,
        minimizer_infimizer_counterexamples: counter,
        cases: reports,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    fn orthant() -> Arc<Cone> {
        Arc::new(Cone::orthant(2).unwrap())
    }

    fn chain() -> FiniteInstance {
        let c = orthant();
        let vals = [0.0, 1.0, 2.0].map(|v| GValue::point(c.clone(), vec![v, v]).unwrap());
        FiniteInstance::new(c, vec![vec![0.0], vec![1.0], vec![2.0]], vals.to_vec()).unwrap()
    }

    #[test]
    fn linear_vop_exact_inf() {
        let inst = FiniteInstance::from_function(&catalog::linear_vop(0.25, 2.0).unwrap()).unwrap();
        let m = inst.indices_of(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let (g, union) = exact_inf(&inst, &m).unwrap();
        let expect = GValue::new(inst.cone().clone(), vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert!(g.equals(&expect, 1e-12).unwrap());
        assert_eq!(union, vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
        // the union of the two translated orthants misses the segment midpoint
        assert!(g.contains_point(&[0.5, 0.5], 0.0).unwrap());
        let all: Vec<usize> = (0..inst.len()).collect();
        assert!(exact_inf(&inst, &all).unwrap().0.equals(&g, 1e-12).unwrap());
    }

    #[test]
    fn chain_minimizer_is_the_largest_set() {
        let inst = chain();
        assert_eq!(enumerate_lattice_minimizers(&inst).unwrap(), vec![0]);
    }

    #[test]
    fn incomparable_values_are_all_minimal() {
        let inst = FiniteInstance::from_function(
            &catalog::hyperbola_on(
                crate::setfn::VarSpace::new_grid((1..=50).map(|k| vec![k as f64 / 5.0]).collect()).unwrap(),
            )
            .unwrap(),
        )
        .unwrap();
        assert_eq!(enumerate_lattice_minimizers(&inst).unwrap().len(), 50);
    }

    #[test]
    fn lemma_on_chain() {
        let inst = chain();
        let all = vec![0, 1, 2];
        let rep = check_inf_translation_lemma(&inst, &all, &all, LemmaOptions::default()).unwrap();
        assert!(rep.passed && rep.c1.holds);
        let rep = check_inf_translation_lemma(&inst, &[2], &all, LemmaOptions::default()).unwrap();
        assert!(rep.passed);
        assert!(!rep.c1.holds);
        assert!(rep.c1.witness.is_some());
        assert!(rep.exhaustive_supersets);
    }

    #[test]
    fn lemma_on_linear_vop() {
        let inst = FiniteInstance::from_function(&catalog::linear_vop(0.5, 2.0).unwrap()).unwrap();
        let m = inst.indices_of(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let all: Vec<usize> = (0..inst.len()).collect();
        let rep = check_inf_translation_lemma(&inst, &m, &all, LemmaOptions::default()).unwrap();
        assert!(rep.passed, "{rep:?}");
        assert!(rep.c1.holds && rep.c4.holds);
        assert!(!rep.exhaustive_supersets);
    }

    #[test]
    fn fault_injection_breaks_antitonicity() {
        let inst = chain();
        let rep =
            check_inf_translation_lemma(&inst, &[0], &[0, 1], LemmaOptions { seed: 0, inject_fault: true }).unwrap();
        assert!(!rep.a.holds);
        assert!(rep.a.witness.is_some());
        assert!(!rep.passed);
    }

    #[test]
    fn commutation_singleton_is_exact() {
        let inst = chain();
        let dirs = oracle_directions(inst.cone(), 8).unwrap();
        assert_eq!(check_commutation(&inst, &[1], &dirs).unwrap(), 0.0);
    }

    #[test]
    fn small_campaign_passes() {
        let spec = CampaignSpec { instances: 20, ..CampaignSpec::default() };
        let rep = run_campaign(&spec, LemmaOptions::default()).unwrap();
        assert!(rep.passed, "{:?} {}", rep.lemma_failures, rep.max_commutation_gap);
    }

    #[test]
    fn instance_json_round_trip() {
        let inst = chain();
        let json = serde_json::to_string(&inst.to_json()).unwrap();
        let back = FiniteInstance::from_json(&serde_json::from_str(&json).unwrap()).unwrap();
        assert_eq!(back.grid(), inst.grid());
        assert_eq!(back.values(), inst.values());
    }

    #[test]
    fn rejects_non_planar() {
        let c = Arc::new(Cone::orthant(3).unwrap());
        let v = GValue::point(c.clone(), vec![0.0; 3]).unwrap();
        assert!(FiniteInstance::new(c, vec![vec![0.0]], vec![v]).is_err());
    }
}
