//! `f(s, t) = ½s² + t` over `conv{(1,0), (−1,0), (0,1)}`: relative strong
//! convexity is zero, yet quadratic growth holds with `μ* = ½`, and the
//! local facial distance certifies it.

use polycond::conditioning::{
    estimate_mu_star, mu_star_lower_bound_quadratic, quadratic_relative_constants, MinimizerSet,
    MuStarSampling, ObjectiveOracle,
};
use polycond::geometry::{local_facial_distance, minimizing_face, LiftedAtoms};
use polycond::harness::problem::flat_direction_problem;
use polycond::solvers::{solve_fw_away, SolveConfig};
use polycond::SimplexPoint;

fn main() -> polycond::Result<()> {
    let spec = flat_direction_problem();
    let f = spec.objective()?;
    let atoms = &spec.atoms;

    let r = quadratic_relative_constants(&f, atoms)?;
    println!("mu_rel = {} (provenance {:?})", r.mu_rel, r.provenance);

    // u = A(½, ½, 0) = 0 and x = (0, 0, 1): Ax − u points along the flat
    // direction of Q, where f is linear, so the Bregman term vanishes while
    // the fiber distance stays positive.
    let x = SimplexPoint::vertex(3, 2);
    let u = atoms.matrix().matvec(&[0.5, 0.5, 0.0]);
    let ax = atoms.matrix().matvec(&x);
    let diff: Vec<f64> = ax.iter().zip(&u).map(|(a, b)| a - b).collect();
    let g = f.gradient(&u);
    let bregman = f.value(&ax) - f.value(&u) - g.iter().zip(&diff).map(|(a, b)| a * b).sum::<f64>();
    let dist = polycond::lp::fiber_distance(&x, &u, atoms.matrix())?;
    println!("witness pair: Bregman gap {bregman}, fiber distance {dist}");

    let u_star = spec.u_star.clone().expect("example carries u*");
    let lifted = LiftedAtoms::from_quadratic(&f, atoms, &u_star)?;
    println!("\nlifted atoms: {}", lifted.provenance());
    println!("minimizing face F(v) = {:?}", minimizing_face(&lifted).atom_indices);
    println!("phi_v = {:.12}", local_facial_distance(&lifted)?);
    let lb = mu_star_lower_bound_quadratic(&f, atoms, &u_star)?;
    println!("certified mu* >= {lb:.12}");

    let basis = MinimizerSet::Basis(spec.z_star.clone().expect("example carries Z*"));
    let grid = estimate_mu_star(&f, atoms, 0.0, &basis, MuStarSampling::Grid { step: 0.01 })?;
    println!("grid estimate over {} points: mu* <= {:.6}", grid.points, grid.estimate);

    let cfg = SolveConfig::fw_away(r.l_rel).with_max_iters(200).with_target_gap(1e-10);
    let trace = solve_fw_away(&f, atoms, &cfg)?;
    println!("\nFW-away: f = {:e} after {} iterations", trace.final_value(), trace.iterations());
    Ok(())
}
