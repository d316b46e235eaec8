use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn setlat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_setlat")).args(args).output().unwrap()
}

fn code(args: &[&str]) -> i32 {
    setlat(args).status.code().unwrap()
}

fn with_out(args: &[&str], out: &Path) -> i32 {
    let mut all: Vec<&str> = args.to_vec();
    all.push("--out");
    all.push(out.to_str().unwrap());
    code(&all)
}

fn report(out: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn solve_linear_vop() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(with_out(&["solve", "--catalog", "linear_vop"], dir.path()), 0);
    let r = report(dir.path());
    assert_eq!(r["exit_code"], 0);
    assert_eq!(r["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(r["config"]["problem"]["seed"], 0);
    assert!(r["tolerances"]["tol_val"].is_number());
    assert_eq!(r["infimum"]["boundary"]["vertices"], serde_json::json!([[0.0, 1.0], [1.0, 0.0]]));
    let support = fs::read_to_string(dir.path().join("support.csv")).unwrap();
    assert!(support.starts_with("k,w1,w2,z1,z2,value,probe_min,gap\n"));
    assert!(dir.path().join("infimum_boundary.csv").exists());
}

#[test]
fn solve_hyperbola_embeds_truncation() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(with_out(&["solve", "--catalog", "hyperbola"], dir.path()), 0);
    let r = report(dir.path());
    assert_eq!(r["problem"]["space"]["box"]["upper"], serde_json::json!([100.0]));
    assert_eq!(r["report"]["candidate"].as_array().unwrap().len(), 9);
}

#[test]
fn verify_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let both = write(dir.path(), "both.json", "[[1,0],[0,1]]");
    let one = write(dir.path(), "one.json", r#"{"candidate": [[1,0]]}"#);
    let none = write(dir.path(), "none.json", "[]");
    let broken = write(dir.path(), "broken.json", "[[1,0],");
    let out = dir.path().join("out");
    let base = ["verify", "--catalog", "linear_vop", "--candidate"];
    assert_eq!(with_out(&[&base[..], &[both.as_str()]].concat(), &out), 0);
    assert_eq!(with_out(&[&base[..], &[one.as_str()]].concat(), &out), 3);
    assert_eq!(with_out(&[&base[..], &[none.as_str()]].concat(), &out), 1);
    let o = setlat(&[&base[..], &[broken.as_str(), "--out", out.to_str().unwrap()]].concat());
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line"));
}

#[test]
fn verify_off_domain_candidate_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let off = write(dir.path(), "off.json", "[[0.3,0.1]]");
    assert_eq!(with_out(&["verify", "--catalog", "linear_vop", "--candidate", &off], &dir.path().join("o")), 1);
}

#[test]
fn infimizer_only_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let cand = write(dir.path(), "m.json", "[[1,0],[0,1],[1,1]]");
    assert_eq!(with_out(&["verify", "--catalog", "linear_vop", "--candidate", &cand], &dir.path().join("o")), 2);
}

#[test]
fn table_problem_file() {
    let dir = tempfile::tempdir().unwrap();
    let problem = write(
        dir.path(),
        "p.json",
        r#"{
            "cone": {"kind": "orthant", "dim": 2},
            "objective": {"table": [
                {"x": [0], "generators": [[2, 0]]},
                {"x": [1], "generators": [[0, 2]]},
                {"x": [2], "generators": [[1, 1], [3, 3]]},
                {"x": [3], "generators": []}
            ]},
            "candidate": [[0], [1]]
        }"#,
    );
    assert_eq!(with_out(&["verify", "--problem", &problem], &dir.path().join("o")), 0);
    assert_eq!(with_out(&["solve", "--problem", &problem], &dir.path().join("s")), 0);
}

#[test]
fn oracle_modes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(with_out(&["oracle", "--instances", "20"], &dir.path().join("a")), 0);
    assert_eq!(with_out(&["oracle", "--instances", "20", "--inject-fault"], &dir.path().join("b")), 3);
    assert_eq!(with_out(&["oracle", "--catalog", "linear_vop"], &dir.path().join("c")), 0);
    let inst = write(
        dir.path(),
        "i.json",
        r#"{"cone": {"kind": "orthant", "dim": 2},
            "table": [{"x": [0], "generators": [[0, 0]]}, {"x": [1], "generators": [[1, 1]]}],
            "m": [[1]]}"#,
    );
    assert_eq!(with_out(&["oracle", "--instance", &inst], &dir.path().join("d")), 0);
    let r = report(&dir.path().join("d"));
    assert_eq!(r["result"]["lemma"]["c1"]["holds"], false);
}

#[test]
fn cvp_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(with_out(&["cvp", "--catalog", "quadratic_cvp", "--mesh", "50"], &dir.path().join("a")), 0);
    assert!(dir.path().join("a/cvp_front.csv").exists());
    assert!(dir.path().join("a/arcs/arc_000.csv").exists());
    let flagged = dir.path().join("b");
    assert_eq!(with_out(&["cvp", "--catalog", "quadratic_cvp", "--mesh", "50", "--alphas", "0,0.5,1"], &flagged), 2);
    let bad = write(
        dir.path(),
        "bad.json",
        r#"{"a": 0, "b": 1, "A": [0], "B": [1], "n": 1, "d": 2, "N": 20,
            "lagrangian": {"catalog": "quadratic_cvp", "params": {"derivative_scale": 1.01}}}"#,
    );
    assert_eq!(with_out(&["cvp", "--problem", &bad], &dir.path().join("c")), 1);
}

#[test]
fn usage_errors() {
    assert_eq!(code(&["frobnicate"]), 1);
    assert_eq!(code(&["solve"]), 1);
    assert_eq!(code(&["solve", "--catalog", "nope"]), 1);
    assert_eq!(code(&["--help"]), 0);
    assert_eq!(code(&["--version"]), 0);
}

#[test]
fn catalog_listing() {
    let o = setlat(&["catalog"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    for name in ["hyperbola", "linear_vop", "quadratic_cvp", "scalar_identity"] {
        assert!(text.contains(name));
    }
    let o = setlat(&["catalog", "linear_vop"]);
    let spec: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(spec["objective"]["params"]["step"], 0.25);
}
