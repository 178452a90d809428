//! The subcommands of the `polycond` tool as library functions. Each returns
//! a serializable report; the binary only parses flags and prints.

use serde::{Deserialize, Serialize};

use crate::conditioning::{
    estimate_mu_star, estimate_relative_constants, mu_star_lower_bound_quadratic,
    quadratic_relative_constants, ConditionReport, MinimizerSet, MuStarEstimate, MuStarSampling,
    ObjectiveOracle, RelativeEstimate,
};
use crate::error::{Error, Result};
use crate::geometry::{diameter, facial_distance_detailed, FaceCertificate};
use crate::lp::SimplexPoint;
use crate::solvers::{
    reference_solution, solve_fw_away, solve_proj_grad, verify_linear_rate, Algorithm,
    RateVerdict, SolveConfig, SolveTrace,
};

use super::problem::ProblemSpec;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PhiReport {
    pub name: Option<String>,
    pub diam: f64,
    pub phi: f64,
    pub face_count: usize,
    pub face: FaceCertificate,
    pub complement: Vec<usize>,
    pub witness_y: SimplexPoint,
    pub witness_z: SimplexPoint,
}

/// Facial distance of the atoms themselves.
pub fn cmd_phi(spec: &ProblemSpec) -> Result<PhiReport> {
    let r = facial_distance_detailed(&spec.atoms, spec.range_norm)?;
    Ok(PhiReport {
        name: spec.name.clone(),
        diam: diameter(&spec.atoms, spec.range_norm),
        phi: r.phi,
        face_count: r.face_count,
        face: r.face,
        complement: r.complement,
        witness_y: r.witness_y,
        witness_z: r.witness_z,
    })
}

/// Where `f★` and `u★` came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimumSource {
    ProblemFile,
    ReferenceSolve,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConstantsReport {
    pub name: Option<String>,
    #[serde(flatten)]
    pub report: ConditionReport,
    pub f_star: f64,
    pub u_star: Vec<f64>,
    pub optimum_source: OptimumSource,
}

/// `f★` and `u★` from the problem file when present, otherwise from a
/// reference solve.
pub fn optimum(spec: &ProblemSpec) -> Result<(f64, Vec<f64>, OptimumSource)> {
    let f = spec.objective()?;
    match (&spec.u_star, spec.f_star) {
        (Some(u), Some(fs)) => Ok((fs, u.clone(), OptimumSource::ProblemFile)),
        (Some(u), None) => Ok((f.value(u), u.clone(), OptimumSource::ProblemFile)),
        _ => {
            let r = reference_solution(&f, &spec.atoms)?;
            Ok((spec.f_star.unwrap_or(r.f), r.u, OptimumSource::ReferenceSolve))
        }
    }
}

pub fn cmd_constants(spec: &ProblemSpec) -> Result<ConstantsReport> {
    let f = spec.objective()?;
    let mut report = quadratic_relative_constants(&f, &spec.atoms)?;
    let (f_star, u_star, source) = optimum(spec)?;
    report.mu_star_lb = Some(mu_star_lower_bound_quadratic(&f, &spec.atoms, &u_star)?);
    Ok(ConstantsReport {
        name: spec.name.clone(),
        report,
        f_star,
        u_star,
        optimum_source: source,
    })
}

/// Step constant for each method: `L_rel` for FW-away, the Euclidean
/// `‖Q^{1/2}A‖²` on sum-zero directions for projected gradient. Objectives
/// affine on `conv(A)` have both equal to zero; the smallest positive double
/// stands in, so every step runs to the boundary.
pub fn step_constant(report: &ConditionReport, algorithm: Algorithm) -> f64 {
    let l = match algorithm {
        Algorithm::FwAway => report.l_rel,
        Algorithm::ProjGrad => report.l_rel_euclidean.unwrap_or(report.l_rel),
    };
    if l > 0.0 {
        l
    } else {
        f64::MIN_POSITIVE
    }
}

/// Runs `algorithm` from vertex 0 with its step constant.
pub fn cmd_solve(spec: &ProblemSpec, algorithm: Algorithm, iters: usize, target_gap: f64) -> Result<SolveTrace> {
    let f = spec.objective()?;
    let l = match quadratic_relative_constants(&f, &spec.atoms) {
        Ok(report) => step_constant(&report, algorithm),
        // Q^{1/2}A is a single point: f is affine on conv(A).
        Err(Error::Degenerate(_)) => f64::MIN_POSITIVE,
        Err(e) => return Err(e),
    };
    let cfg = match algorithm {
        Algorithm::FwAway => SolveConfig::fw_away(l),
        Algorithm::ProjGrad => SolveConfig::proj_grad(l),
    }
    .with_max_iters(iters)
    .with_target_gap(target_gap)
    .without_iterates();
    match algorithm {
        Algorithm::FwAway => solve_fw_away(&f, &spec.atoms, &cfg),
        Algorithm::ProjGrad => solve_proj_grad(&f, &spec.atoms, &cfg),
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VerifyReport {
    pub f_star: f64,
    pub lipschitz: f64,
    pub mu_star: f64,
    pub verdict: RateVerdict,
    /// Observed contraction no worse than the bound's.
    pub empirical_within_bound: bool,
    pub verified: bool,
}

/// Checks a trace against the rate bound for its algorithm, with `μ*` set
/// to the certified lower bound and `L` to the method's step constant.
pub fn cmd_verify(spec: &ProblemSpec, trace: &SolveTrace) -> Result<VerifyReport> {
    let c = cmd_constants(spec)?;
    let mu = c
        .report
        .mu_star_lb
        .ok_or_else(|| Error::InsufficientData("no growth constant".into()))?;
    let l = step_constant(&c.report, trace.algorithm);
    let verdict = verify_linear_rate(trace, c.f_star, l, mu, trace.algorithm)?;
    let empirical_within_bound = verdict.empirical_rate.is_none_or(|r| r <= verdict.bound_rate);
    Ok(VerifyReport {
        f_star: c.f_star,
        lipschitz: l,
        mu_star: mu,
        verified: verdict.all_hold && empirical_within_bound,
        empirical_within_bound,
        verdict,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EstimateReport {
    pub name: Option<String>,
    pub relative: RelativeEstimate,
    pub mu_star: MuStarEstimate,
    pub mu_star_sampling: MuStarSampling,
    pub f_star: f64,
}

/// Sampled relative constants and a sampled `μ*` upper estimate. `Z★` is
/// the problem's basis when given, the fiber of `u★` otherwise; `grid`
/// replaces random points by the grid of that step.
pub fn cmd_estimate(spec: &ProblemSpec, samples: usize, seed: u64, grid: Option<f64>) -> Result<EstimateReport> {
    let f = spec.objective()?;
    let relative = estimate_relative_constants(&f, &spec.atoms, samples, seed)?;
    let (f_star, u_star, _) = optimum(spec)?;
    let minimizers = match &spec.z_star {
        Some(z) => MinimizerSet::Basis(z.clone()),
        None => MinimizerSet::Fiber(u_star),
    };
    let sampling = match grid {
        Some(step) => MuStarSampling::Grid { step },
        None => MuStarSampling::Random { samples, seed },
    };
    let mu_star = estimate_mu_star(&f, &spec.atoms, f_star, &minimizers, sampling)?;
    Ok(EstimateReport {
        name: spec.name.clone(),
        relative,
        mu_star,
        mu_star_sampling: sampling,
        f_star,
    })
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("reports serialize") + "\n"
}
