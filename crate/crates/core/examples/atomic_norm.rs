//! Gauge of a point by bisection and by linear programming.
use greedy_atoms::atoms::random_unit_sphere;
use greedy_atoms::geometry::{atomic_norm, atomic_norm_lp};
use nalgebra::DVector;

fn main() -> greedy_atoms::error::Result<()> {
    let set = random_unit_sphere(3, 6, 1)?.symmetrize();
    for x in [vec![1.0, 0.0, 0.0], vec![0.2, -0.7, 0.4], vec![2.0, 2.0, 2.0]] {
        let x = DVector::from_vec(x);
        println!("{:?}: bisection {:.9}, lp {:.9}", x.as_slice(), atomic_norm(&set, &x)?, atomic_norm_lp(&set, &x)?);
    }
    Ok(())
}
