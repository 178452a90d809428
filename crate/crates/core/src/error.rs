use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not symmetric (relative asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },

    #[error("{what} did not converge after {iterations} iterations")]
    NoConvergence { what: &'static str, iterations: usize },

    #[error("matrix is not positive semidefinite (eigenvalue {eigenvalue:e})")]
    NotPsd { eigenvalue: f64 },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("point is not in the polytope (phase-one residual {residual:e})")]
    InfeasiblePoint { residual: f64 },

    #[error("linear program solver failed: {0}")]
    LpFailure(String),

    #[error("face enumeration over {atoms} atoms exceeds the cap of {cap}")]
    EnumerationCap { atoms: usize, cap: usize },

    #[error("degenerate polytope: {0}")]
    Degenerate(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("no usable samples: {0}")]
    NoData(String),

    #[error("supplied minimizer fails first-order optimality (residual {residual:e})")]
    StaleMinimizer { residual: f64 },

    #[error("objective error: {0}")]
    Objective(String),

    #[error("backtracking exceeded the doubling cap (L = {lipschitz:e})")]
    LipschitzExplosion { lipschitz: f64 },

    #[error("inconsistent rate-verification inputs: {0}")]
    RateData(String),

    #[error("invalid field `{field}`: {message}")]
    InvalidField { field: String, message: String },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code for the command-line tool: 2 for bad input, 3 for
    /// numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NoConvergence { .. }
            | Error::LpFailure(_)
            | Error::LipschitzExplosion { .. }
            | Error::Objective(_) => 3,
            _ => 2,
        }
    }

    pub(crate) fn field(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::InvalidField {
            field: field.into(),
            message: message.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
