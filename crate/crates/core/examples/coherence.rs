//! Cumulative coherence against the width of the symmetrized dictionary.
use greedy_atoms::atoms::{random_unit_sphere, HalfDictionary};
use greedy_atoms::geometry::{cumulative_coherence, mdw};

fn main() -> greedy_atoms::error::Result<()> {
    let half = HalfDictionary::new(random_unit_sphere(5, 8, 2)?.atoms().to_vec())?;
    let width = mdw(&half.to_atom_set())?.value;
    for m in 1..half.len() {
        println!("m = {m}: coherence {:.4}", cumulative_coherence(&half, m)?);
    }
    let n = half.len() as f64;
    println!("mdw {width:.4}, 1 - n*mdw^2 = {:.4}", 1.0 - n * width * width);
    Ok(())
}
