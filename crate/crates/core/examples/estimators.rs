use polycond::conditioning::{estimate_mu_star, sample_relative_quotients, MinimizerSet, MuStarSampling};
use polycond::harness::builtin;
use polycond::solvers::reference_solution;

// Sampled quotients on the identity quadratic over the 4-simplex, and a
// random-point estimate of the growth constant.
fn main() -> polycond::Result<()> {
    let spec = builtin("simplex(4)")?;
    let f = spec.objective()?;
    let qs = sample_relative_quotients(&f, &spec.atoms, 5000, 42)?;
    let (vertex, random): (Vec<_>, Vec<_>) = qs.iter().partition(|q| q.vertex_pair);
    let range = |v: &[&polycond::conditioning::QuotientSample]| {
        v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), q| (lo.min(q.quotient), hi.max(q.quotient)))
    };
    println!("vertex pairs: {} quotients in {:?}", vertex.len(), range(&vertex));
    println!("random pairs: {} quotients in {:?}", random.len(), range(&random));

    let best = reference_solution(&f, &spec.atoms)?;
    let est = estimate_mu_star(
        &f,
        &spec.atoms,
        best.f,
        &MinimizerSet::Fiber(best.u.clone()),
        MuStarSampling::Random { samples: 5000, seed: 42 },
    )?;
    println!("mu* <= {:.6} at {:?}", est.estimate, est.argmin.as_slice());
    Ok(())
}
