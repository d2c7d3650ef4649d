//! Checks a recorded trace against its sublinear envelope.
use greedy_atoms::atoms::l1_vertices;
use greedy_atoms::geometry::{rate_bound, BoundKind};
use greedy_atoms::harness::{check_envelope, params_from_trace};
use greedy_atoms::objectives::Quadratic;
use greedy_atoms::solvers::{run, Algorithm, SolverSpec};
use nalgebra::DVector;

fn main() -> greedy_atoms::error::Result<()> {
    let set = l1_vertices(10)?;
    let obj = Quadratic::least_squares(DVector::from_fn(10, |i, _| ((i * 7) % 5) as f64 - 2.0))?;
    let trace = run(&SolverSpec::new(Algorithm::Fw, 0, 200), &obj, &set, set.get(0).coords())?;
    let bound = rate_bound(BoundKind::SublinearFw, params_from_trace(&trace))?;
    let report = check_envelope(&trace, &bound)?;
    for v in &report.verdicts {
        println!("{}: observed {:.3e} limit {:.3e} pass {}", v.check, v.observed, v.limit, v.pass);
    }
    Ok(())
}
