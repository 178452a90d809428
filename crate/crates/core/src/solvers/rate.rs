//! Checking traces against the linear-rate bounds
//! `(1 − min{μ*/(16L), ½})^{k/2}` for FW-away and
//! `(1 − min{μ*/(4L), ½})^k` for projected gradient.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::{Algorithm, LipschitzMode, SolveTrace};

/// Absolute slack on each per-iterate inequality.
pub const RATE_SLACK: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateCheck {
    pub k: usize,
    pub gap: f64,
    pub bound: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RateVerdict {
    pub algorithm: Algorithm,
    /// Contraction factor of the bound per unit exponent.
    pub rate: f64,
    pub checks: Vec<RateCheck>,
    pub all_hold: bool,
    pub first_violation: Option<usize>,
    /// Observed per-iteration contraction `(gap_K/gap_0)^{1/K}` over the
    /// longest prefix with gaps above the slack.
    pub empirical_rate: Option<f64>,
    /// The bound's per-iteration contraction for comparison.
    pub bound_rate: f64,
}

/// Per-iterate verdicts of `f(u_k) − f★ ≤ ρ^{e(k)}·(f(u_0) − f★) + 1e-12`,
/// with `e(k) = k/2` for FW-away and `e(k) = k` for projected gradient.
///
/// Refuses traces that the bound does not cover: FW-away runs must start at
/// a vertex, and solver-produced traces must use a given step constant
/// without exact line search. Traces loaded from CSV carry no step rule and
/// are checked as-is.
pub fn verify_linear_rate(
    trace: &SolveTrace,
    f_star: f64,
    lipschitz: f64,
    mu_star: f64,
    algorithm: Algorithm,
) -> Result<RateVerdict> {
    if !(mu_star > 0.0 && mu_star.is_finite()) {
        return Err(Error::RateData(format!("mu_star must be positive, got {mu_star}")));
    }
    if !(lipschitz > 0.0 && lipschitz.is_finite()) {
        return Err(Error::RateData(format!("L must be positive, got {lipschitz}")));
    }
    if !f_star.is_finite() {
        return Err(Error::RateData("f_star is not finite".into()));
    }
    let first = trace
        .records
        .first()
        .ok_or_else(|| Error::RateData("empty trace".into()))?;
    if trace.algorithm != algorithm {
        return Err(Error::RateData(format!(
            "trace was produced by {} but {} bound requested",
            trace.algorithm, algorithm
        )));
    }
    let min_f = trace.min_value();
    if f_star > min_f + RATE_SLACK {
        return Err(Error::RateData(format!(
            "f_star {f_star:e} exceeds the trace minimum {min_f:e}"
        )));
    }
    if algorithm == Algorithm::FwAway && first.support_size != 1 {
        return Err(Error::RateData(
            "the FW-away bound needs a vertex start".into(),
        ));
    }
    match trace.lipschitz_mode {
        Some(LipschitzMode::Given(_)) if !trace.exact_line_search => {}
        None => {}
        Some(_) => {
            return Err(Error::RateData(
                "the bound covers only the fixed step rule with a given constant".into(),
            ))
        }
    }

    let (rate, exponent_scale) = match algorithm {
        Algorithm::FwAway => (1.0 - (mu_star / (16.0 * lipschitz)).min(0.5), 0.5),
        Algorithm::ProjGrad => (1.0 - (mu_star / (4.0 * lipschitz)).min(0.5), 1.0),
    };
    let g0 = first.f - f_star;
    let checks: Vec<RateCheck> = trace
        .records
        .iter()
        .map(|r| {
            let gap = r.f - f_star;
            let bound = rate.powf(exponent_scale * r.k as f64) * g0;
            RateCheck {
                k: r.k,
                gap,
                bound,
                holds: gap <= bound + RATE_SLACK,
            }
        })
        .collect();
    let first_violation = checks.iter().find(|c| !c.holds).map(|c| c.k);

    let last = checks.iter().rev().find(|c| c.gap > RATE_SLACK && c.k > 0);
    let empirical_rate = match last {
        Some(c) if g0 > RATE_SLACK => Some((c.gap / g0).powf(1.0 / c.k as f64)),
        _ => None,
    };
    Ok(RateVerdict {
        algorithm,
        rate,
        all_hold: first_violation.is_none(),
        first_violation,
        checks,
        empirical_rate,
        bound_rate: rate.powf(exponent_scale),
    })
}
