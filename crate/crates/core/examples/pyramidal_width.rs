//! Minimal directional width of the l1 ball falls like 1/sqrt(d).
use greedy_atoms::atoms::{l1_vertices, theta_pair};
use greedy_atoms::geometry::mdw;

fn main() -> greedy_atoms::error::Result<()> {
    for d in 2..=8 {
        let est = mdw(&l1_vertices(d)?)?;
        println!("d = {d}: {:.6} (1/sqrt(d) = {:.6}, {:?})", est.value, 1.0 / (d as f64).sqrt(), est.method);
    }
    for theta in [0.1, 0.5, 1.0, std::f64::consts::FRAC_PI_2] {
        println!("pair at {theta:.3}: {:.6}", mdw(&theta_pair(theta)?)?.value);
    }
    Ok(())
}
