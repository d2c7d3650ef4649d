//! Matching pursuit on the l1 ball with an all-ones target: the factor 1 - 1/(d - t) is exact.
use greedy_atoms::harness::run_orthant_decay;

fn main() -> greedy_atoms::error::Result<()> {
    let report = run_orthant_decay(12, 0)?;
    for (k, v) in &report.aggregates {
        println!("{k}: {v:.3e}");
    }
    println!("all checks pass: {}", report.passed());
    Ok(())
}
