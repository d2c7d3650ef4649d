//! Per-step contraction of generalized matching pursuit on two-atom sets.
use greedy_atoms::harness::run_two_atom_tightness;

fn main() -> greedy_atoms::error::Result<()> {
    let report = run_two_atom_tightness(&[0.1, 0.5, 1.0, 1.5], 20, 200, 0, 4)?;
    for (k, v) in &report.aggregates {
        println!("{k}: {v:.4}");
    }
    for v in &report.verdicts {
        println!("{} {:.4} ({})", v.check, v.observed, if v.pass { "pass" } else { "fail" });
    }
    Ok(())
}
