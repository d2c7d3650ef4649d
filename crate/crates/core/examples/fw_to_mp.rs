//! A Frank-Wolfe step on a growing copy of the set approaches a matching-pursuit step.
use greedy_atoms::harness::{default_alpha_grid, run_fw_to_mp, FwToMpInstance};

fn main() -> greedy_atoms::error::Result<()> {
    let report = run_fw_to_mp(&default_alpha_grid(), &FwToMpInstance::default(), 0)?;
    for run in &report.runs {
        println!("{}: {:?}", run.label, run.values);
    }
    println!("{:?}", report.aggregates);
    Ok(())
}
