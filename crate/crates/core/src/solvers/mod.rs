//! First-order methods for `min f(Ax)` over the standard simplex.
//!
//! Both solvers work in weight space `x ∈ Δ_{n−1}` and record one
//! [`IterationRecord`] per iterate, including the terminal one, so that
//! traces can be checked against the linear-rate bounds in [`rate`].

mod fw_away;
mod proj_grad;
pub mod rate;

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::conditioning::constants::refine_quadratic_minimizer;
use crate::conditioning::{optimality_residual, ObjectiveOracle};
use crate::error::{Error, Result};
use crate::geometry::AtomMatrix;
use crate::lp::{convex_weights, SimplexPoint};

pub use fw_away::{fw_away_step, solve_fw_away};
pub use proj_grad::solve_proj_grad;
pub use rate::{verify_linear_rate, RateCheck, RateVerdict};

pub(crate) use fw_away::run_fw_away;

/// Weights at or below this are treated as zero and clamped.
pub const SUPPORT_TOL: f64 = 1e-14;

const MAX_DOUBLINGS: usize = 60;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Algorithm {
    #[serde(rename = "fw-away")]
    FwAway,
    #[serde(rename = "pg")]
    ProjGrad,
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Algorithm::FwAway => write!(f, "fw-away"),
            Algorithm::ProjGrad => write!(f, "pg"),
        }
    }
}

impl FromStr for Algorithm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fw-away" | "fw_away" => Ok(Algorithm::FwAway),
            "pg" | "proj_grad" => Ok(Algorithm::ProjGrad),
            other => Err(Error::field("algo", format!("unknown algorithm `{other}`"))),
        }
    }
}

/// How the smoothness constant used in the step rule is obtained.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LipschitzMode {
    Given(f64),
    /// Double until the quadratic upper model holds, relax by `shrink`
    /// after each accepted step, never below `initial`.
    Backtracking { initial: f64, growth: f64, shrink: f64 },
}

impl LipschitzMode {
    pub fn backtracking(initial: f64) -> Self {
        LipschitzMode::Backtracking {
            initial,
            growth: 2.0,
            shrink: 0.5,
        }
    }

    fn initial(&self) -> f64 {
        match *self {
            LipschitzMode::Given(l) => l,
            LipschitzMode::Backtracking { initial, .. } => initial,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StartPoint {
    Vertex(usize),
    Barycenter,
    Given(SimplexPoint),
    /// Vertex drawn uniformly using the config seed.
    RandomVertex,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolveConfig {
    pub algorithm: Algorithm,
    pub max_iters: usize,
    pub lipschitz: LipschitzMode,
    /// Exact minimization along the FW direction; quadratics only.
    pub exact_line_search: bool,
    pub target_gap: f64,
    pub seed: u64,
    pub x0: StartPoint,
    /// Keep every iterate `x_k` in the trace.
    pub store_iterates: bool,
}

impl SolveConfig {
    pub fn fw_away(lipschitz: f64) -> Self {
        Self {
            algorithm: Algorithm::FwAway,
            max_iters: 1000,
            lipschitz: LipschitzMode::Given(lipschitz),
            exact_line_search: false,
            target_gap: 1e-12,
            seed: 0,
            x0: StartPoint::Vertex(0),
            store_iterates: true,
        }
    }

    pub fn proj_grad(lipschitz: f64) -> Self {
        Self {
            algorithm: Algorithm::ProjGrad,
            ..Self::fw_away(lipschitz)
        }
    }

    pub fn with_max_iters(mut self, n: usize) -> Self {
        self.max_iters = n;
        self
    }

    pub fn with_target_gap(mut self, gap: f64) -> Self {
        self.target_gap = gap;
        self
    }

    pub fn with_start(mut self, x0: StartPoint) -> Self {
        self.x0 = x0;
        self
    }

    pub fn with_lipschitz(mut self, mode: LipschitzMode) -> Self {
        self.lipschitz = mode;
        self
    }

    pub fn with_exact_line_search(mut self, on: bool) -> Self {
        self.exact_line_search = on;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn without_iterates(mut self) -> Self {
        self.store_iterates = false;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_iters < 1 {
            return Err(Error::field("max_iters", "must be at least 1"));
        }
        if !(self.target_gap >= 0.0) {
            return Err(Error::field("target_gap", "must be nonnegative"));
        }
        match self.lipschitz {
            LipschitzMode::Given(l) if !(l > 0.0 && l.is_finite()) => {
                Err(Error::field("lipschitz", "given constant must be positive"))
            }
            LipschitzMode::Backtracking {
                initial,
                growth,
                shrink,
            } if !(initial > 0.0 && growth > 1.0 && shrink > 0.0 && shrink < 1.0) => Err(
                Error::field("lipschitz", "backtracking needs initial > 0 and growth > 1 > shrink > 0"),
            ),
            _ => Ok(()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StepType {
    /// Toward the best atom.
    Regular,
    /// Away from the worst in-support atom, not hitting the boundary.
    Away,
    /// Away step that reached `α_max < 1`, removing an atom from the support.
    Drop,
    /// Projected-gradient step.
    #[serde(rename = "proj")]
    Projection,
    /// Terminal iterate; no step taken.
    Stop,
}

impl StepType {
    pub fn as_str(&self) -> &'static str {
        match self {
            StepType::Regular => "regular",
            StepType::Away => "away",
            StepType::Drop => "drop",
            StepType::Projection => "proj",
            StepType::Stop => "stop",
        }
    }
}

impl FromStr for StepType {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "regular" => StepType::Regular,
            "away" => StepType::Away,
            "drop" => StepType::Drop,
            "proj" => StepType::Projection,
            "stop" => StepType::Stop,
            other => return Err(Error::field("step_type", format!("unknown step type `{other}`"))),
        })
    }
}

/// State at iterate `k` and the step taken from it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub k: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub x: Option<SimplexPoint>,
    /// `f(A x_k)`
    pub f: f64,
    /// `−⟨∇f(u_k), v⟩` for the chosen FW direction; for projected gradient
    /// the regular FW gap.
    pub gap: f64,
    pub step_type: StepType,
    pub alpha: f64,
    pub alpha_max: f64,
    pub support_size: usize,
    /// Smoothness constant used for this step.
    pub lipschitz: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolveTrace {
    pub algorithm: Algorithm,
    /// `None` when the trace was loaded from a file.
    pub lipschitz_mode: Option<LipschitzMode>,
    pub exact_line_search: bool,
    pub records: Vec<IterationRecord>,
    /// `None` for traces loaded from CSV, which store no iterates.
    pub final_point: Option<SimplexPoint>,
    pub converged: bool,
}

impl SolveTrace {
    pub fn final_value(&self) -> f64 {
        self.records.last().map_or(f64::NAN, |r| r.f)
    }

    pub fn min_value(&self) -> f64 {
        self.records.iter().map(|r| r.f).fold(f64::INFINITY, f64::min)
    }

    pub fn count(&self, t: StepType) -> usize {
        self.records.iter().filter(|r| r.step_type == t).count()
    }

    pub fn iterations(&self) -> usize {
        self.records.len().saturating_sub(1)
    }
}

fn resolve_start(
    x0: &StartPoint,
    n: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    match x0 {
        StartPoint::Vertex(i) if *i < n => Ok(SimplexPoint::vertex(n, *i).into_inner()),
        StartPoint::Vertex(i) => Err(Error::field("x0", format!("vertex {i} out of range for {n} atoms"))),
        StartPoint::Barycenter => Ok(SimplexPoint::barycenter(n).into_inner()),
        StartPoint::Given(p) if p.dim() == n => Ok(p.to_vec()),
        StartPoint::Given(p) => Err(Error::Dimension(format!(
            "start point has {} weights for {n} atoms",
            p.dim()
        ))),
        StartPoint::RandomVertex => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            Ok(SimplexPoint::vertex(n, rng.random_range(0..n)).into_inner())
        }
    }
}

pub(crate) fn support_of(x: &[f64]) -> Vec<usize> {
    (0..x.len()).filter(|&i| x[i] > SUPPORT_TOL).collect()
}

/// Clamps sub-threshold weights to zero and renormalizes when the sum has
/// drifted by more than `1e-13`.
pub(crate) fn clean_weights(x: &mut [f64]) {
    for v in x.iter_mut() {
        if *v <= SUPPORT_TOL {
            *v = 0.0;
        }
    }
    let s: f64 = x.iter().sum();
    if (s - 1.0).abs() > 1e-13 {
        x.iter_mut().for_each(|v| *v /= s);
    }
}

fn finite_or_err(values: &[f64], what: &str) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::Objective(format!("non-finite {what}")))
    }
}

/// High-accuracy minimizer used for `f★`, `u★` and `Z★` when the caller has
/// none. Runs FW-away with exact line search when the objective supports
/// it, backtracking otherwise; quadratics are then solved exactly on the
/// identified optimal face.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReferenceSolution {
    pub x: SimplexPoint,
    pub u: Vec<f64>,
    pub f: f64,
    pub gap: f64,
}

pub fn reference_solution(obj: &dyn ObjectiveOracle, atoms: &AtomMatrix) -> Result<ReferenceSolution> {
    let exact = obj.curvature(&vec![0.0; obj.dim()]).is_some();
    let mut cfg = SolveConfig::fw_away(1.0)
        .with_max_iters(200_000)
        .with_target_gap(1e-14)
        .with_exact_line_search(exact)
        .without_iterates();
    if !exact {
        cfg.lipschitz = LipschitzMode::backtracking(1e-3);
    }
    // Start from the best vertex to keep the run short.
    let start = (0..atoms.len())
        .min_by(|&i, &j| obj.value(&atoms.atom(i)).total_cmp(&obj.value(&atoms.atom(j))))
        .unwrap_or(0);
    cfg.x0 = StartPoint::Vertex(start);
    let trace = solve_fw_away(obj, atoms, &cfg)?;
    let mut x = trace.final_point.expect("solver traces carry a final point");
    let mut u = atoms.matrix().matvec(&x);
    if let Some(q) = obj.as_quadratic() {
        if let Some(exact) = refine_quadratic_minimizer(q, atoms, &u) {
            if let Ok(w) = convex_weights(atoms.matrix(), &exact) {
                x = w;
                u = exact;
            }
        }
    }
    let f = obj.value(&u);
    let gap = -optimality_residual(obj, atoms, &u);
    Ok(ReferenceSolution { x, u, f, gap })
}
