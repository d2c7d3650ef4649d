//! Runs an experiment from a JSON description and writes its series as CSV.
use greedy_atoms::harness::{run_experiment, ExperimentSpec};

fn main() -> greedy_atoms::error::Result<()> {
    let spec: ExperimentSpec = serde_json::from_str(r#"{"name": "corollary2", "params": {"dimension": 6}, "seed": 4}"#)?;
    let report = run_experiment(&spec, 2)?;
    report.write_series_csv(std::io::stdout())?;
    eprintln!("passed: {}", report.passed());
    Ok(())
}
