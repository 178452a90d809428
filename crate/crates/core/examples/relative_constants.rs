//! Relative smoothness and strong convexity of a quadratic over a polytope,
//! checked against sampled Bregman quotients.

use polycond::conditioning::{estimate_relative_constants, quadratic_relative_constants};
use polycond::harness::builtin;

fn main() -> polycond::Result<()> {
    let spec = builtin("random_quadratic(3,6,7,25)")?;
    let f = spec.objective()?;
    let r = quadratic_relative_constants(&f, &spec.atoms)?;
    println!("diam(Q^1/2 A) = {:.6}", r.diam);
    println!("phi(Q^1/2 A)  = {:.6}", r.phi);
    println!("L_rel = {:.6}, mu_rel = {:.6}, kappa = {:.4}", r.l_rel, r.mu_rel, r.kappa_rel);
    println!("euclidean L   = {:.6}", r.l_rel_euclidean.unwrap_or(f64::NAN));

    let est = estimate_relative_constants(&f, &spec.atoms, 20_000, 1)?;
    println!(
        "\n{} quotients: max {:.6} (<= L_rel), min {:.6} (>= mu_rel)",
        est.quotients, est.l_est, est.mu_est
    );
    // Vertex pairs attain the diameter, so the maximum is tight.
    assert!((est.l_est - r.l_rel).abs() < 1e-6);
    assert!(est.mu_est >= r.mu_rel - 1e-8);
    Ok(())
}
