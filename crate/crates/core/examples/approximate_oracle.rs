//! A subsampling oracle that only promises half the best descent.
use greedy_atoms::atoms::random_unit_sphere;
use greedy_atoms::lmo::{lmo_exact, query, LmoConfig, LmoMode};
use nalgebra::DVector;

fn main() -> greedy_atoms::error::Result<()> {
    let set = random_unit_sphere(8, 200, 3)?.symmetrize();
    let q = DVector::from_fn(8, |i, _| (i as f64 - 3.5).sin());
    let exact = lmo_exact(&set, &q)?;
    let anchor = DVector::zeros(8);
    for call in 0..5 {
        let cfg = LmoConfig::subsample(LmoMode::ApproxMp, 0.5, 0.1, 11).for_call(call);
        let got = query(&set, &q, &anchor, &cfg)?;
        println!(
            "call {call}: atom {} inner {:.4} (best {:.4}, certified delta {:?})",
            got.index, got.inner, exact.inner, got.certified_delta
        );
    }
    Ok(())
}
