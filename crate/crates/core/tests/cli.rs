//! The binary is a thin shell: its output must match the library calls.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use greedy_atoms::cli::{self, ExperimentArgs, GeometryArgs};
use greedy_atoms::geometry::GeometryReport;
use greedy_atoms::solvers::Trace;
use serde_json::json;

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_greedy-atoms")).args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, value: serde_json::Value) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, serde_json::to_string_pretty(&value).unwrap()).unwrap();
    p
}

fn orthant_config(dir: &Path, iterations: usize) -> PathBuf {
    write(
        dir,
        "config.json",
        json!({
            "atoms": {"generator": "l1-vertices", "dimension": 10},
            "objective": {"kind": "least-squares", "target": vec![1.0; 10]},
            "solver": {"algorithm": "mp", "T": iterations}
        }),
    )
}

fn geometry_args(atoms: PathBuf) -> GeometryArgs {
    GeometryArgs { atoms, objective: None, mdw_restarts: 200, coherence_m: vec![], inradius: false, rho: 1.0, samples: 10_000 }
}

#[test]
fn solve_matches_library_and_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let config = orthant_config(dir.path(), 10);
    let out = dir.path().join("trace.json");
    let o = bin(&["solve", config.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let written = fs::read_to_string(&out).unwrap();
    let expected = cli::cmd_solve(&config, None).unwrap();
    assert_eq!(written, expected.to_json().unwrap());
    let trace = Trace::from_json(&written).unwrap();
    assert!(trace.records.last().unwrap().subopt.unwrap() <= 1e-12);
    let csv = fs::read_to_string(out.with_extension("csv")).unwrap();
    assert_eq!(csv.lines().count(), trace.records.len() + 1);
}

#[test]
fn zero_iterations_give_a_single_record() {
    let dir = tempfile::tempdir().unwrap();
    let config = orthant_config(dir.path(), 0);
    let o = bin(&["solve", config.to_str().unwrap()]);
    assert!(o.status.success());
    let trace = Trace::from_json(&String::from_utf8(o.stdout).unwrap()).unwrap();
    assert_eq!(trace.records.len(), 1);
}

#[test]
fn input_problems_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(
        dir.path(),
        "config.json",
        json!({
            "atoms": {"path": "missing-atoms.json"},
            "objective": {"kind": "least-squares", "target": [1.0, 1.0]},
            "solver": {"algorithm": "mp", "T": 2}
        }),
    );
    assert_eq!(bin(&["solve", config.to_str().unwrap()]).status.code(), Some(2));
    let bad = write(dir.path(), "bad.json", json!({"atoms": 3}));
    assert_eq!(bin(&["solve", bad.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(bin(&["experiment", "nonsense"]).status.code(), Some(2));
}

#[test]
fn solver_failure_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    // the start lies outside conv(A)
    let config = write(
        dir.path(),
        "config.json",
        json!({
            "atoms": {"generator": "l1-vertices", "dimension": 2},
            "objective": {"kind": "least-squares", "target": [1.0, 1.0]},
            "solver": {"algorithm": "fw", "variant": 0, "T": 2},
            "x0": [3.0, 0.0]
        }),
    );
    assert_eq!(bin(&["solve", config.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn geometry_reports() {
    let dir = tempfile::tempdir().unwrap();
    let l1 = write(dir.path(), "l1.json", json!({"generator": "l1-vertices", "dimension": 4}));
    let o = bin(&["geometry", l1.to_str().unwrap()]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    let report: GeometryReport = serde_json::from_str(&text).unwrap();
    assert!((report.mdw.value - 0.5).abs() < 1e-9);
    let lib = cli::cmd_geometry(&geometry_args(l1), None).unwrap();
    assert_eq!(text.trim_end(), serde_json::to_string_pretty(&lib).unwrap());

    let pair = write(dir.path(), "pair.json", json!({"generator": "theta-pair", "theta": std::f64::consts::FRAC_PI_2}));
    let o = bin(&["geometry", pair.to_str().unwrap()]);
    let report: GeometryReport = serde_json::from_slice(&o.stdout).unwrap();
    assert!((report.mdw.value - 0.5f64.sqrt()).abs() < 1e-9);

    let asym = write(dir.path(), "asym.json", json!({"dimension": 2, "atoms": [[1.0, 0.0], [0.0, 1.0]]}));
    let o = bin(&["geometry", asym.to_str().unwrap(), "--inradius"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unsupported"));
}

#[test]
fn experiment_writes_report_and_series() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("runs");
    let o = bin(&["experiment", "corollary2", "--d", "10", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let written = fs::read_to_string(out.join("corollary2.json")).unwrap();
    let args = ExperimentArgs {
        name: "corollary2".into(),
        params: None,
        dimension: Some(10),
        iterations: None,
        inits: None,
        theta: None,
        alpha: None,
    };
    assert_eq!(written, cli::cmd_experiment(&args, None, 1).unwrap().to_json().unwrap());
    assert!(out.join("corollary2.csv").exists());
}

#[test]
fn verify_frank_wolfe_trace() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(
        dir.path(),
        "config.json",
        json!({
            "atoms": {"generator": "l1-vertices", "dimension": 8},
            "objective": {"kind": "least-squares", "target": [2.0, -1.0, 0.5, 0.0, 0.3, -0.7, 1.1, 0.2]},
            "solver": {"algorithm": "fw", "variant": 2, "T": 40}
        }),
    );
    let trace = dir.path().join("trace.json");
    assert!(bin(&["solve", config.to_str().unwrap(), "--out", trace.to_str().unwrap()]).status.success());
    let o = bin(&["verify", trace.to_str().unwrap(), "--kind", "sublinear-fw", "--delta", "1"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let o = bin(&["verify", trace.to_str().unwrap(), "--kind", "thm1", "--delta", "1"]);
    assert!(o.status.success());
    // an impossible contraction claim fails the verdict
    let o = bin(&["verify", trace.to_str().unwrap(), "--kind", "linear-mp", "--mdw", "10"]);
    assert_eq!(o.status.code(), Some(1));
    let o = bin(&["verify", trace.to_str().unwrap(), "--kind", "linear-mp"]);
    assert_eq!(o.status.code(), Some(2), "mdw is not part of a trace");
    let o = bin(&["verify", trace.to_str().unwrap(), "--kind", "thm-one"]);
    assert_eq!(o.status.code(), Some(2));
}
