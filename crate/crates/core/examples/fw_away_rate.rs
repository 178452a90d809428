//! Frank-Wolfe with away steps on a random quadratic, with the trace
//! checked against `(1 − min{μ*/(16L), ½})^{k/2}` and the step mix printed.

use polycond::conditioning::{mu_star_lower_bound_quadratic, quadratic_relative_constants};
use polycond::harness::builtin;
use polycond::solvers::{reference_solution, solve_fw_away, verify_linear_rate, Algorithm, SolveConfig, StepType};

fn main() -> polycond::Result<()> {
    let spec = builtin("random_quadratic(3,6,11,10)")?;
    let f = spec.objective()?;
    let r = quadratic_relative_constants(&f, &spec.atoms)?;
    let best = reference_solution(&f, &spec.atoms)?;
    let mu = mu_star_lower_bound_quadratic(&f, &spec.atoms, &best.u)?;
    println!("L_rel = {:.6}, certified mu* >= {mu:.6}, f* = {:.15}", r.l_rel, best.f);

    let cfg = SolveConfig::fw_away(r.l_rel).with_max_iters(500).with_target_gap(0.0);
    let trace = solve_fw_away(&f, &spec.atoms, &cfg)?;
    let verdict = verify_linear_rate(&trace, best.f, r.l_rel, mu, Algorithm::FwAway)?;

    println!("\n{:>5} {:>14} {:>14}  step", "k", "f - f*", "bound");
    for (c, rec) in verdict.checks.iter().zip(&trace.records).step_by(25) {
        println!("{:>5} {:>14.6e} {:>14.6e}  {}", c.k, c.gap, c.bound, rec.step_type.as_str());
    }
    println!(
        "\nall hold: {}; bound rate {:.6}, empirical {:?}",
        verdict.all_hold, verdict.bound_rate, verdict.empirical_rate
    );
    println!(
        "steps: {} regular, {} away, {} drop",
        trace.count(StepType::Regular),
        trace.count(StepType::Away),
        trace.count(StepType::Drop)
    );
    Ok(())
}
