//! Curvature constants for a quadratic, exact, against their smoothness ceilings.
use greedy_atoms::atoms::l1_vertices;
use greedy_atoms::geometry::{curvature_cf, curvature_cf_mp, mu_f_mp};
use greedy_atoms::harness::random_quadratic;

fn main() -> greedy_atoms::error::Result<()> {
    let set = l1_vertices(4)?;
    let obj = random_quadratic(4, 5)?;
    let cf = curvature_cf(&obj, &set, 0, 0)?;
    let cf_mp = curvature_cf_mp(&obj, &set, 2.0, 0, 0)?;
    let mu = mu_f_mp(&obj, &set, 2.0, 5000, 0)?;
    println!("Cf   = {:.6} (ceiling {:.6}, exact {})", cf.value, cf.ceiling, cf.exact);
    println!("CfMP = {:.6} (ceiling {:.6}, exact {})", cf_mp.value, cf_mp.ceiling, cf_mp.exact);
    println!("muFMP sampled {:.6}, floor {:.6}", mu.sampled, mu.floor);
    Ok(())
}
