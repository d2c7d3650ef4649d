//! Matching pursuit and its orthogonal variant on the l1 ball.
use greedy_atoms::atoms::l1_vertices;
use greedy_atoms::objectives::Quadratic;
use greedy_atoms::solvers::{run, Algorithm, SolverSpec};
use nalgebra::DVector;

fn main() -> greedy_atoms::error::Result<()> {
    let set = l1_vertices(6)?;
    let obj = Quadratic::least_squares(DVector::from_vec(vec![1.0, -2.0, 0.5, 0.0, 3.0, -1.0]))?;
    let x0 = DVector::zeros(6);
    for algorithm in [Algorithm::Mp, Algorithm::Omp] {
        let trace = run(&SolverSpec::new(algorithm, 0, 12), &obj, &set, &x0)?;
        let last = trace.records.last().unwrap();
        println!("{algorithm:?}: f = {:.3e} after {} steps, x = {:?}", last.f_value, last.t, trace.final_x);
    }
    Ok(())
}
