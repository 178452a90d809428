//! Projected gradient in weight space. Its step constant is smoothness with
//! respect to the Euclidean norm on weights, which for the simplex with
//! `f = ½‖u‖²` is 1, not the ℓ1 constant ½.

use polycond::conditioning::QuadraticObjective;
use polycond::solvers::{solve_proj_grad, SolveConfig};
use polycond::AtomMatrix;

fn main() -> polycond::Result<()> {
    let f = QuadraticObjective::half_squared_norm(3);
    let atoms = AtomMatrix::simplex(3);
    for l in [0.5, 1.0] {
        let cfg = SolveConfig::proj_grad(l).with_max_iters(8).with_target_gap(0.0);
        let trace = solve_proj_grad(&f, &atoms, &cfg)?;
        let values: Vec<String> = trace.records.iter().map(|r| format!("{:.4}", r.f)).collect();
        println!("L = {l}: f = {}", values.join(" "));
    }
    println!("f* = {:.4}", 1.0 / 6.0);
    Ok(())
}
