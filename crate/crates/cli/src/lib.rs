//! `setlat` command-line front end.
//!
//! Exit codes: 0 sc-solution (or all checks passed), 2 infimizer only (or a
//! flagged CVP direction), 3 fail, 1 input error.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use setlat::calcvar::{self, CvpOptions, CvpProblem, CvpReport};
use setlat::oracle::{self, CampaignSpec, InstanceJson, LemmaOptions};
use setlat::problem::{self, Problem, ProblemSpec};
use setlat::solver::{self, MinimizeOptions, SolutionReport, VerifySettings};
use setlat::{CandidateSet, Cone, DualBase, ExtReal, Point, SetFunction, VarSpace};

pub const EXIT_INPUT: i32 = 1;
pub const EXIT_FAIL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "setlat", version, about = "Set optimization by inf-translation and scalarization")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sweep scalarizations, collect minimizers and verify them.
    Solve(SolveArgs),
    /// Verify a given candidate set.
    Verify(VerifyArgs),
    /// Brute-force checks on finite instances.
    Oracle(OracleArgs),
    /// Multi-criteria calculus of variations sweep.
    Cvp(CvpArgs),
    /// List catalog problems or print one as JSON.
    Catalog(CatalogArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ProblemArgs {
    /// Problem JSON file.
    #[arg(long, conflicts_with = "catalog", required_unless_present = "catalog")]
    pub problem: Option<PathBuf>,
    /// Catalog problem name.
    #[arg(long)]
    pub catalog: Option<String>,
    /// Base anchor ẑ, e.g. "1,1"; defaults to the sum of the cone's generators.
    #[arg(long, value_parser = parse_point)]
    pub anchor: Option<Point>,
    /// Value tolerance; 1e-6 on grids, 1e-3 on boxes by default.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Verification probe resolution on box spaces.
    #[arg(long, default_value_t = 2000)]
    pub probe_res: usize,
    /// Random convex combinations sampled from co M.
    #[arg(long, default_value_t = 64)]
    pub co_samples: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct OutputArgs {
    #[serde(skip)]
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "json,csv")]
    pub format: Vec<Format>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SolveArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// Number K of interior sweep directions (α = k / (K + 1) in the plane).
    #[arg(long, default_value_t = 9)]
    pub base_res: usize,
    /// Verify on the closed base with R + 1 directions instead of the sweep base.
    #[arg(long)]
    pub verify_res: Option<usize>,
    #[arg(long, default_value_t = 1e-6)]
    pub merge_tol: f64,
    #[arg(long, default_value_t = solver::DEFAULT_STEP_TOL)]
    pub step_tol: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// Candidate JSON: an array of points or {"candidate": [...]}; defaults
    /// to the problem's "candidate" field.
    #[arg(long)]
    pub candidate: Option<PathBuf>,
    /// Resolution R of the closed verification base (R + 1 directions).
    #[arg(long, default_value_t = 180)]
    pub base_res: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct OracleArgs {
    /// Finite instance JSON ({"cone", "table", optional "m" and "n"}).
    #[arg(long, conflicts_with = "catalog")]
    pub instance: Option<PathBuf>,
    /// A grid catalog problem tabulated as an instance.
    #[arg(long)]
    pub catalog: Option<String>,
    /// Candidate M for instance or catalog mode (defaults to the whole grid).
    #[arg(long)]
    pub candidate: Option<PathBuf>,
    /// Random instances in campaign mode.
    #[arg(long, default_value_t = 200)]
    pub instances: usize,
    #[arg(long, default_value_t = 20)]
    pub max_points: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Resolution of the direction base used for commutation checks.
    #[arg(long, default_value_t = 16)]
    pub direction_res: usize,
    /// Corrupt the superset side of the antitonicity check.
    #[arg(long)]
    pub inject_fault: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CvpArgs {
    /// CVP problem JSON ({a, b, A, B, n, d, N, lagrangian}).
    #[arg(long, conflicts_with = "catalog", required_unless_present = "catalog")]
    pub problem: Option<PathBuf>,
    #[arg(long)]
    pub catalog: Option<String>,
    /// Mesh size N, overriding the problem file.
    #[arg(long)]
    pub mesh: Option<usize>,
    #[arg(long, default_value_t = 1e-11)]
    pub grad_tol: f64,
    /// Number K of interior directions (α = k / (K + 1)).
    #[arg(long, default_value_t = 9)]
    pub base_res: usize,
    /// Explicit α values for d = 2, e.g. "0,0.5,1"; overrides --base-res.
    #[arg(long, value_delimiter = ',')]
    pub alphas: Option<Vec<f64>>,
    #[arg(long, value_parser = parse_point)]
    pub anchor: Option<Point>,
    /// Tolerance of the φ̂(u; M) ≥ φ̂(0; M) probe check.
    #[arg(long, default_value_t = 1e-4)]
    pub tol: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub residual_tol: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct CatalogArgs {
    pub name: Option<String>,
}

fn parse_point(s: &str) -> std::result::Result<Point, String> {
    s.split(',').map(|t| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}"))).collect()
}

/// Parses arguments and runs; returns the process exit code.
pub fn run_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { 0 };
        }
    };
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_INPUT
        }
    }
}

pub fn run(cli: &Cli) -> Result<i32> {
    match &cli.command {
        Command::Solve(a) => run_solve(a),
        Command::Verify(a) => run_verify(a),
        Command::Oracle(a) => run_oracle(a),
        Command::Cvp(a) => run_cvp(a),
        Command::Catalog(a) => run_catalog(a),
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn parse_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = read(path)?;
    serde_json::from_str(&text).map_err(|e| anyhow!("malformed JSON in {}: {e}", path.display()))
}

fn load_problem(a: &ProblemArgs) -> Result<Problem> {
    let spec = match (&a.problem, &a.catalog) {
        (Some(path), _) => parse_json::<ProblemSpec>(path)?,
        (None, Some(name)) => ProblemSpec::catalog(name),
        (None, None) => bail!("need --problem or --catalog"),
    };
    Ok(spec.build()?)
}

fn anchor_for(cone: &Cone, given: &Option<Point>) -> Result<Point> {
    match given {
        Some(a) => Ok(a.clone()),
        None => cone.default_anchor().ok_or_else(|| anyhow!("the cone has no default anchor; pass --anchor")),
    }
}

#[derive(Serialize)]
struct ProblemInfo<'a> {
    name: &'a str,
    params: &'a std::collections::BTreeMap<String, f64>,
    cone: setlat::ConeSpec,
    /// The variable space, i.e. the truncation of the search domain.
    space: &'a VarSpace,
}

fn problem_info(p: &Problem) -> ProblemInfo<'_> {
    ProblemInfo { name: &p.name, params: &p.params, cone: p.function.cone().spec(), space: p.function.space() }
}

#[derive(Serialize)]
struct InfimumInfo {
    generators: Vec<Point>,
    #[serde(skip_serializing_if = "Option::is_none")]
    boundary: Option<setlat::Boundary2d>,
}

#[derive(Serialize)]
struct SetReport<'a, C: Serialize> {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    config: &'a C,
    problem: ProblemInfo<'a>,
    anchor: Point,
    tolerances: Tolerances,
    report: &'a SolutionReport,
    infimum: InfimumInfo,
    exit_code: i32,
}

#[derive(Serialize)]
struct Tolerances {
    tol_val: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    step_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    merge_tol: Option<f64>,
}

pub fn run_solve(a: &SolveArgs) -> Result<i32> {
    let p = load_problem(&a.problem)?;
    let f = &p.function;
    let anchor = anchor_for(f.cone(), &a.problem.anchor)?;
    let sweep_base = f.cone().interior_directions(&anchor, a.base_res)?;
    let opts = MinimizeOptions { step_tol: a.step_tol, seed: a.problem.seed, ..MinimizeOptions::default() };
    let results = solver::sweep(f, &sweep_base, &opts);
    let m = solver::collect_candidate(&results, a.merge_tol).map_err(|e| {
        let why: Vec<String> = results.iter().filter_map(|r| r.flag.clone()).collect();
        anyhow!("{e}; sweep flags: {}", why.join("; "))
    })?;
    let verify_base = match a.verify_res {
        Some(r) => f.cone().base_directions(&anchor, r)?,
        None => sweep_base,
    };
    let (mut report, tol) = verify(f, &m, &verify_base, &a.problem)?;
    report.per_direction = results;
    let code = report.verdict.exit_code();
    let info = SetReport {
        tool: "setlat",
        version: env!("CARGO_PKG_VERSION"),
        command: "solve",
        config: a,
        problem: problem_info(&p),
        anchor,
        tolerances: Tolerances { tol_val: tol, step_tol: Some(a.step_tol), merge_tol: Some(a.merge_tol) },
        infimum: infimum_info(f, &m)?,
        report: &report,
        exit_code: code,
    };
    write_set_outputs(&a.output, &info)?;
    Ok(code)
}

pub fn run_verify(a: &VerifyArgs) -> Result<i32> {
    let p = load_problem(&a.problem)?;
    let f = &p.function;
    let points = match (&a.candidate, &p.candidate) {
        (Some(path), _) => problem::parse_candidate(&read(path)?)
            .map_err(|e| anyhow!("malformed candidate JSON in {}: {e}", path.display()))?,
        (None, Some(m)) => m.points().to_vec(),
        (None, None) => bail!("no candidate set: pass --candidate or add \"candidate\" to the problem"),
    };
    let m = CandidateSet::new(points)?;
    if !m.within(f.space()) {
        bail!("candidate points must lie in the variable space");
    }
    let anchor = anchor_for(f.cone(), &a.problem.anchor)?;
    let base = f.cone().base_directions(&anchor, a.base_res)?;
    let (report, tol) = verify(f, &m, &base, &a.problem)?;
    let code = report.verdict.exit_code();
    let info = SetReport {
        tool: "setlat",
        version: env!("CARGO_PKG_VERSION"),
        command: "verify",
        config: a,
        problem: problem_info(&p),
        anchor,
        tolerances: Tolerances { tol_val: tol, step_tol: None, merge_tol: None },
        infimum: infimum_info(f, &m)?,
        report: &report,
        exit_code: code,
    };
    write_set_outputs(&a.output, &info)?;
    Ok(code)
}

fn verify(f: &SetFunction, m: &CandidateSet, base: &DualBase, a: &ProblemArgs) -> Result<(SolutionReport, f64)> {
    let tol = a.tol.unwrap_or_else(|| solver::default_tolerance(f.space()));
    let probe = solver::verification_probe(f.space(), a.probe_res, a.seed);
    let settings = VerifySettings {
        tol,
        probe_size: probe.len(),
        probe_res: a.probe_res,
        seed: a.seed,
        co_sampling: solver::co_sampling(a.co_samples, a.seed),
        directions: base.len(),
    };
    Ok((solver::verify_sc_solution(f, m, base, &probe, settings)?, tol))
}

fn infimum_info(f: &SetFunction, m: &CandidateSet) -> Result<InfimumInfo> {
    let inf = solver::build_infimum(f, m)?;
    Ok(InfimumInfo { generators: inf.generators().to_vec(), boundary: inf.boundary_2d() })
}

fn fmt_ext(v: ExtReal) -> String {
    if v.is_finite() {
        format!("{:?}", v.value())
    } else {
        v.to_string()
    }
}

fn join(values: &[f64]) -> String {
    values.iter().map(|v| format!("{v:?}")).collect::<Vec<_>>().join(",")
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_file(dir, name, &text)
}

fn write_file(dir: &Path, name: &str, text: &str) -> Result<()> {
    let path = dir.join(name);
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).with_context(|| format!("cannot create {}", parent.display()))?;
    }
    fs::write(&path, text).with_context(|| format!("cannot write {}", path.display()))
}

fn write_set_outputs<C: Serialize>(out: &OutputArgs, info: &SetReport<'_, C>) -> Result<()> {
    fs::create_dir_all(&out.out).with_context(|| format!("cannot create {}", out.out.display()))?;
    if out.format.contains(&Format::Json) {
        write_json(&out.out, "report.json", info)?;
    }
    if out.format.contains(&Format::Csv) {
        let r = info.report;
        let w = r.weights.first().map_or(0, |w| w.len());
        let d = r.directions.first().map_or(0, |z| z.len());
        let mut csv = String::from("k");
        (1..=w).for_each(|i| write!(csv, ",w{i}").unwrap());
        (1..=d).for_each(|i| write!(csv, ",z{i}").unwrap());
        csv.push_str(",value,probe_min,gap\n");
        for k in 0..r.directions.len() {
            writeln!(
                csv,
                "{k},{},{},{},{},{}",
                join(&r.weights[k]),
                join(&r.directions[k]),
                fmt_ext(r.infimizer.candidate_min[k]),
                fmt_ext(r.infimizer.probe_min[k]),
                fmt_ext(r.infimizer.gaps[k]),
            )
            .unwrap();
        }
        write_file(&out.out, "support.csv", &csv)?;
        if let Some(b) = &info.infimum.boundary {
            let mut csv = String::from("kind,z1,z2\n");
            writeln!(csv, "direction,{}", join(&b.start_direction)).unwrap();
            for v in &b.vertices {
                writeln!(csv, "vertex,{}", join(v)).unwrap();
            }
            writeln!(csv, "direction,{}", join(&b.end_direction)).unwrap();
            write_file(&out.out, "infimum_boundary.csv", &csv)?;
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OracleInput {
    #[serde(flatten)]
    pub instance: InstanceJson,
    #[serde(default)]
    pub m: Option<Vec<Point>>,
    #[serde(default)]
    pub n: Option<Vec<Point>>,
}

#[derive(Serialize)]
struct OracleReport<'a, R: Serialize> {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    config: &'a OracleArgs,
    tolerance: f64,
    commutation_tolerance: f64,
    result: R,
    passed: bool,
    exit_code: i32,
}

const COMMUTATION_TOL: f64 = 1e-12;

pub fn run_oracle(a: &OracleArgs) -> Result<i32> {
    let opts = LemmaOptions { seed: a.seed, inject_fault: a.inject_fault };
    let single = |inst: oracle::FiniteInstance, m: Option<Vec<Point>>, n: Option<Vec<Point>>| -> Result<i32> {
        let all: Vec<usize> = (0..inst.len()).collect();
        let mi = match m {
            Some(p) => inst.indices_of(&p)?,
            None => all.clone(),
        };
        let mut ni = match n {
            Some(p) => inst.indices_of(&p)?,
            None => all.clone(),
        };
        for i in &mi {
            if !ni.contains(i) {
                ni.push(*i);
            }
        }
        let case = oracle::check_case(0, &inst, &mi, &ni, opts, a.direction_res)?;
        let passed = case.lemma.passed && case.commutation_gap <= COMMUTATION_TOL;
        emit_oracle(a, case, passed)
    };
    if let Some(path) = &a.instance {
        let input: OracleInput = parse_json(path)?;
        let inst = oracle::FiniteInstance::from_json(&input.instance)?;
        let m = match &a.candidate {
            Some(p) => Some(candidate_file(p)?),
            None => input.m,
        };
        return single(inst, m, input.n);
    }
    if let Some(name) = &a.catalog {
        let p = ProblemSpec::catalog(name).build()?;
        let inst = oracle::FiniteInstance::from_function(&p.function)?;
        let m = a.candidate.as_deref().map(candidate_file).transpose()?;
        return single(inst, m, None);
    }
    let spec =
        CampaignSpec { instances: a.instances, seed: a.seed, max_points: a.max_points, ..CampaignSpec::default() };
    let report = oracle::run_campaign(&spec, opts)?;
    let passed = report.passed;
    emit_oracle(a, report, passed)
}

fn candidate_file(path: &Path) -> Result<Vec<Point>> {
    problem::parse_candidate(&read(path)?).map_err(|e| anyhow!("malformed candidate JSON in {}: {e}", path.display()))
}

fn emit_oracle<R: Serialize>(a: &OracleArgs, result: R, passed: bool) -> Result<i32> {
    let code = if passed { 0 } else { EXIT_FAIL };
    let report = OracleReport {
        tool: "setlat",
        version: env!("CARGO_PKG_VERSION"),
        command: "oracle",
        config: a,
        tolerance: oracle::ORACLE_TOL,
        commutation_tolerance: COMMUTATION_TOL,
        result,
        passed,
        exit_code: code,
    };
    fs::create_dir_all(&a.output.out).with_context(|| format!("cannot create {}", a.output.out.display()))?;
    if a.output.format.contains(&Format::Json) {
        write_json(&a.output.out, "report.json", &report)?;
    }
    Ok(code)
}

#[derive(Serialize)]
struct CvpRunReport<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    config: &'a CvpArgs,
    problem: &'a CvpProblem,
    anchor: Point,
    report: &'a CvpReport,
    exit_code: i32,
}

pub fn run_cvp(a: &CvpArgs) -> Result<i32> {
    let mut prob = match (&a.problem, &a.catalog) {
        (Some(path), _) => parse_json::<CvpProblem>(path)?,
        (None, Some(name)) if name == "quadratic_cvp" => CvpProblem::quadratic_default(100),
        (None, Some(name)) => bail!("{name:?} is not a calculus of variations catalog problem"),
        (None, None) => bail!("need --problem or --catalog"),
    };
    if let Some(n) = a.mesh {
        prob.mesh = n;
    }
    let (lag, boundary, cone) = prob.build(a.seed)?;
    let anchor = anchor_for(&cone, &a.anchor)?;
    let base = match &a.alphas {
        Some(alphas) => {
            if cone.dim() != 2 {
                bail!("--alphas needs d = 2");
            }
            if alphas.iter().any(|x| !(0.0..=1.0).contains(x)) {
                bail!("α values must lie in [0, 1]");
            }
            let weights = alphas.iter().map(|&x| vec![x, 1.0 - x]).collect();
            DualBase::from_weights(cone.clone(), anchor.clone(), weights)?
        }
        None => cone.interior_directions(&anchor, a.base_res)?,
    };
    let opts = CvpOptions {
        grad_tol: a.grad_tol,
        seed: a.seed,
        probe_tol: a.tol,
        residual_tol: a.residual_tol,
        ..CvpOptions::default()
    };
    let report = calcvar::cvp_sweep(&lag, &base, &boundary, prob.mesh, &opts)?;
    let code = report.exit_code();
    let out = &a.output;
    fs::create_dir_all(&out.out).with_context(|| format!("cannot create {}", out.out.display()))?;
    if out.format.contains(&Format::Json) {
        let info = CvpRunReport {
            tool: "setlat",
            version: env!("CARGO_PKG_VERSION"),
            command: "cvp",
            config: a,
            problem: &prob,
            anchor,
            report: &report,
            exit_code: code,
        };
        write_json(&out.out, "report.json", &info)?;
    }
    if out.format.contains(&Format::Csv) {
        let d = lag.d();
        let n = lag.n();
        let w = base.weights().first().map_or(0, |w| w.len());
        let mut csv = String::from("k");
        (1..=w).for_each(|i| write!(csv, ",w{i}").unwrap());
        (1..=d).for_each(|i| write!(csv, ",zeta{i}").unwrap());
        (1..=d).for_each(|i| write!(csv, ",F{i}").unwrap());
        csv.push_str(",residual,probe_slack,converged\n");
        for (k, r) in report.directions.iter().enumerate() {
            writeln!(
                csv,
                "{k},{},{},{},{:?},{:?},{}",
                join(&r.weights),
                join(&r.zeta),
                join(&r.objective),
                r.first_order_residual,
                r.probe_slack,
                r.converged
            )
            .unwrap();
            let mut arc = String::from("t");
            (1..=n).for_each(|i| write!(arc, ",x{i}").unwrap());
            arc.push('\n');
            for (i, x) in r.arc.states.iter().enumerate() {
                writeln!(arc, "{:?},{}", r.arc.time(i), join(x)).unwrap();
            }
            write_file(&out.out, &format!("arcs/arc_{k:03}.csv"), &arc)?;
        }
        write_file(&out.out, "cvp_front.csv", &csv)?;
    }
    Ok(code)
}

pub fn run_catalog(a: &CatalogArgs) -> Result<i32> {
    match &a.name {
        None => {
            for (name, about) in problem::CATALOG {
                println!("{name:16} {about}");
            }
        }
        Some(name) if name == "quadratic_cvp" => {
            println!("{}", serde_json::to_string_pretty(&CvpProblem::quadratic_default(100))?);
        }
        Some(name) => {
            let spec = ProblemSpec::catalog(name);
            let p = spec.build()?;
            let full = ProblemSpec {
                cone: Some(p.function.cone().spec()),
                objective: problem::ObjectiveSpec { params: p.params.clone(), ..spec.objective },
                ..spec
            };
            println!("{}", serde_json::to_string_pretty(&full)?);
        }
    }
    Ok(0)
}
