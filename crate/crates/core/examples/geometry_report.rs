//! Width, radius, coherence and curvature of a random symmetric dictionary.
use greedy_atoms::atoms::random_unit_sphere;
use greedy_atoms::geometry::{geometry_report, ReportOptions};
use greedy_atoms::objectives::Quadratic;
use nalgebra::DVector;

fn main() -> greedy_atoms::error::Result<()> {
    let set = random_unit_sphere(4, 10, 7)?.symmetrize();
    let obj = Quadratic::least_squares(DVector::from_element(4, 1.0))?;
    let opts = ReportOptions { coherence_m: vec![1, 2, 3], samples: 2000, ..Default::default() };
    let report = geometry_report(&set, Some(&obj), &opts)?;
    println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    Ok(())
}
