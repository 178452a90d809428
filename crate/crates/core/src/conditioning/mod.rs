//! Smoothness and strong convexity of `f` relative to `conv(A)`.

pub mod constants;
pub mod estimate;
mod objective;

pub use constants::{
    general_relative_bounds, mu_star_lower_bound_quadratic, optimality_residual,
    quadratic_relative_constants, ConditionReport, Provenance,
};
pub use estimate::{
    estimate_mu_star, estimate_relative_constants, sample_relative_quotients, MinimizerSet,
    MuStarEstimate, MuStarSampling, QuotientSample, RelativeEstimate,
};
pub use objective::{check_gradient, ClassicalConstants, FnObjective, ObjectiveOracle, QuadraticObjective};
