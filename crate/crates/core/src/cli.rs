//! Command-line front end. Each subcommand loads its inputs, calls the
//! matching library function and writes JSON (plus CSV where tabular).
//!
//! Exit codes: 0 success, 1 solver failure or failed verdict, 2 bad input.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use nalgebra::DVector;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::atoms::{AtomSet, AtomSetDoc, Generator};
use crate::error::{Error, Result};
use crate::geometry::{self, rate_bound, BoundKind, GeometryReport, MdwOptions, ReportOptions};
use crate::harness::{self, ExperimentName, ExperimentParams, ExperimentReport, ExperimentSpec};
use crate::objectives::ObjectiveDoc;
use crate::solvers::{self, SolverSpec, Trace};

#[derive(Debug, Parser)]
#[command(name = "greedy-atoms", version, about = "Greedy optimization over atom dictionaries")]
pub struct Cli {
    /// Seed overriding the one in the input documents.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output file (solve, geometry, verify) or directory (experiment).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Concurrent runs for experiments.
    #[arg(long, global = true, default_value_t = 1)]
    pub jobs: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a solver from a JSON run configuration.
    Solve { config: PathBuf },
    /// Geometry report of an atom set.
    Geometry(GeometryArgs),
    /// Run a named experiment.
    Experiment(ExperimentArgs),
    /// Check a trace against a rate bound.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct GeometryArgs {
    /// Atom set document or generator document.
    pub atoms: PathBuf,
    /// Objective document; adds curvature constants to the report.
    #[arg(long)]
    pub objective: Option<PathBuf>,
    #[arg(long, default_value_t = 200)]
    pub mdw_restarts: usize,
    /// Orders `m` of the cumulative coherence to report.
    #[arg(long, value_delimiter = ',')]
    pub coherence_m: Vec<usize>,
    /// Fail when the effective inradius is unavailable.
    #[arg(long)]
    pub inradius: bool,
    #[arg(long, default_value_t = 1.0)]
    pub rho: f64,
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// appendix-a, corollary2, fw-to-mp, envelope, linear-rate or coherence-mdw
    pub name: String,
    /// JSON file with experiment parameters.
    #[arg(long)]
    pub params: Option<PathBuf>,
    /// Dimension (corollary2, envelope).
    #[arg(long = "d")]
    pub dimension: Option<usize>,
    #[arg(long = "T")]
    pub iterations: Option<usize>,
    #[arg(long)]
    pub inits: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub theta: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub alpha: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    pub trace: PathBuf,
    /// sublinear-fw, sublinear-mp, linear-mp, lower-bound, sublinear-affine-fw,
    /// sublinear-affine-mp or linear-affine
    #[arg(long)]
    pub kind: String,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub rho: Option<f64>,
    #[arg(long)]
    pub mdw: Option<f64>,
    #[arg(long = "mu-f-mp")]
    pub mu_f_mp: Option<f64>,
    #[arg(long = "cf")]
    pub cf: Option<f64>,
    #[arg(long = "cf-mp")]
    pub cf_mp: Option<f64>,
}

/// Atoms given inline, by generator, or by reference to another file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AtomsSource {
    Generated(Generator),
    Inline(AtomSetDoc),
    File { path: PathBuf },
}

impl AtomsSource {
    pub fn load(&self, base: &Path) -> Result<AtomSet> {
        match self {
            AtomsSource::Generated(g) => g.build(),
            AtomsSource::Inline(doc) => AtomSet::from_doc(doc),
            AtomsSource::File { path } => {
                let path = base.join(path);
                read_doc::<AtomsSource>(&path)?.load(path.parent().unwrap_or(Path::new(".")))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub atoms: AtomsSource,
    pub objective: ObjectiveDoc,
    pub solver: SolverSpec,
    /// Starting point; defaults to the first atom for the Frank-Wolfe family and the origin otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

/// Reads a JSON document; unreadable or malformed input is a schema error.
pub fn read_doc<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::Schema(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Schema(format!("{}: {e}", path.display())))
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Schema(_) | Error::Unsupported(_) | Error::MissingParameter(_) | Error::Json(_) => 2,
        _ => 1,
    }
}

/// Loads and runs a configuration. A global seed replaces the config and solver seeds.
pub fn cmd_solve(config: &Path, seed: Option<u64>) -> Result<Trace> {
    let cfg: RunConfig = read_doc(config)?;
    let base = config.parent().unwrap_or(Path::new("."));
    let set = cfg.atoms.load(base)?;
    let obj = cfg.objective.build()?;
    let mut spec = cfg.solver.clone();
    if let Some(s) = seed.or(cfg.seed) {
        spec.seed = s;
    }
    let x0 = match &cfg.x0 {
        Some(v) => DVector::from_column_slice(v),
        None if spec.algorithm.is_fw_family() => set.get(0).coords().clone(),
        None => DVector::zeros(set.dim()),
    };
    solvers::run(&spec, obj.as_ref(), &set, &x0)
}

pub fn cmd_geometry(args: &GeometryArgs, seed: Option<u64>) -> Result<GeometryReport> {
    let src: AtomsSource = read_doc(&args.atoms)?;
    let set = src.load(args.atoms.parent().unwrap_or(Path::new(".")))?;
    let obj = match &args.objective {
        Some(p) => Some(read_doc::<ObjectiveDoc>(p)?.build()?),
        None => None,
    };
    let opts = ReportOptions {
        mdw: MdwOptions { restarts: args.mdw_restarts, seed: seed.unwrap_or(0), ..MdwOptions::default() },
        coherence_m: args.coherence_m.clone(),
        rho: args.rho,
        samples: args.samples,
        require_inradius: args.inradius,
    };
    geometry::geometry_report(&set, obj.as_deref(), &opts)
}

pub fn cmd_experiment(args: &ExperimentArgs, seed: Option<u64>, jobs: usize) -> Result<ExperimentReport> {
    let name: ExperimentName = args.name.parse()?;
    let mut params: ExperimentParams = match &args.params {
        Some(p) => read_doc(p)?,
        None => ExperimentParams::default(),
    };
    params.dimension = args.dimension.or(params.dimension);
    params.iterations = args.iterations.or(params.iterations);
    params.inits = args.inits.or(params.inits);
    params.theta_grid = args.theta.clone().or(params.theta_grid);
    params.alpha_grid = args.alpha.clone().or(params.alpha_grid);
    let spec = ExperimentSpec { params, ..ExperimentSpec::new(name, seed.unwrap_or(0)) };
    harness::run_experiment(&spec, jobs)
}

pub fn cmd_verify(args: &VerifyArgs) -> Result<ExperimentReport> {
    let trace: Trace = read_doc(&args.trace)?;
    let kind: BoundKind = serde_json::from_value(serde_json::Value::String(args.kind.clone()))
        .map_err(|_| Error::Schema(format!("unknown bound kind {:?}", args.kind)))?;
    let mut params = harness::params_from_trace(&trace);
    params.delta = args.delta.or(params.delta);
    params.rho = args.rho.or(params.rho);
    params.mdw = args.mdw.or(params.mdw);
    params.mu_f_mp = args.mu_f_mp.or(params.mu_f_mp);
    params.cf = args.cf.or(params.cf);
    params.cf_mp = args.cf_mp.or(params.cf_mp);
    harness::check_envelope(&trace, &rate_bound(kind, params)?)
}

fn emit(out: Option<&Path>, json: &str) -> Result<()> {
    match out {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir)?;
            }
            fs::write(p, json)?;
        }
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(json.as_bytes())?;
            stdout.write_all(b"\n")?;
        }
    }
    Ok(())
}

fn summarize(report: &ExperimentReport) {
    for v in &report.verdicts {
        eprintln!("{} {}: {} (limit {})", if v.pass { "PASS" } else { "FAIL" }, v.check, v.observed, v.limit);
    }
}

fn dispatch(cli: &Cli) -> Result<bool> {
    match &cli.command {
        Command::Solve { config } => {
            let trace = cmd_solve(config, cli.seed)?;
            let cfg_out = read_doc::<RunConfig>(config)?.output;
            let out = cli.out.clone().or(cfg_out);
            emit(out.as_deref(), &trace.to_json()?)?;
            if let Some(p) = out {
                trace.write_csv(fs::File::create(p.with_extension("csv"))?)?;
            }
            Ok(true)
        }
        Command::Geometry(args) => {
            let report = cmd_geometry(args, cli.seed)?;
            emit(cli.out.as_deref(), &serde_json::to_string_pretty(&report)?)?;
            Ok(true)
        }
        Command::Experiment(args) => {
            let report = cmd_experiment(args, cli.seed, cli.jobs.max(1))?;
            summarize(&report);
            match &cli.out {
                Some(dir) => {
                    fs::create_dir_all(dir)?;
                    let stem = report.name.as_str();
                    fs::write(dir.join(format!("{stem}.json")), report.to_json()?)?;
                    report.write_series_csv(fs::File::create(dir.join(format!("{stem}.csv")))?)?;
                }
                None => emit(None, &report.to_json()?)?,
            }
            Ok(report.passed())
        }
        Command::Verify(args) => {
            let report = cmd_verify(args)?;
            summarize(&report);
            emit(cli.out.as_deref(), &report.to_json()?)?;
            Ok(report.passed())
        }
    }
}

/// Parses `args` (program name first) and runs the command, returning the exit code.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(&cli) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn run_config_parses_generator_and_inline_atoms() {
        let gen: RunConfig = serde_json::from_str(
            r#"{"atoms": {"generator": "l1-vertices", "dimension": 3},
                "objective": {"kind": "least-squares", "target": [1, 1, 1]},
                "solver": {"algorithm": "mp", "T": 3}}"#,
        )
        .unwrap();
        assert!(matches!(gen.atoms, AtomsSource::Generated(Generator::L1Vertices { dimension: 3 })));
        let inline: RunConfig = serde_json::from_str(
            r#"{"atoms": {"dimension": 2, "atoms": [[1, 0], [0, 1]]},
                "objective": {"kind": "least-squares", "target": [1, 1]},
                "solver": {"algorithm": "fw", "variant": 2, "T": 5}}"#,
        )
        .unwrap();
        assert!(matches!(inline.atoms, AtomsSource::Inline(_)));
    }

    #[test]
    fn bad_documents_are_schema_errors() {
        let err = read_doc::<RunConfig>(Path::new("/nonexistent/config.json")).unwrap_err();
        assert_eq!(exit_code(&err), 2);
        assert_eq!(exit_code(&Error::Unsupported("x".into())), 2);
        assert_eq!(exit_code(&Error::NonConvergence { iterations: 1, residual: 1.0 }), 1);
    }

    #[test]
    fn unknown_names_exit_two() {
        assert_eq!(run_from(["greedy-atoms", "experiment", "nope"]), 2);
        assert_eq!(run_from(["greedy-atoms", "frobnicate"]), 2);
    }
}
