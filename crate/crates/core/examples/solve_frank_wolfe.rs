//! The four Frank-Wolfe step rules side by side.
use greedy_atoms::atoms::l1_vertices;
use greedy_atoms::objectives::Quadratic;
use greedy_atoms::solvers::{run, Algorithm, SolverSpec};
use nalgebra::DVector;

fn main() -> greedy_atoms::error::Result<()> {
    let set = l1_vertices(5)?;
    let obj = Quadratic::least_squares(DVector::from_vec(vec![0.3, -0.2, 0.1, 0.25, -0.15]))?;
    let x0 = set.get(0).coords().clone();
    for variant in 0..=3 {
        let trace = run(&SolverSpec::new(Algorithm::Fw, variant, 100), &obj, &set, &x0)?;
        let last = trace.records.last().unwrap();
        println!("variant {variant}: subopt {:.3e}, gap {:?}", last.subopt.unwrap_or(f64::NAN), trace.records[99].dual_gap);
    }
    Ok(())
}
