use thiserror::Error;

/// Errors raised anywhere in the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid function: {0}")]
    InvalidFunction(String),

    #[error("perspective multiplier must be nonnegative, got {0}")]
    NegativeMultiplier(f64),

    #[error("function is not differentiable at {at} (subgradient width {width:e}); use the Moreau-smoothed approximant")]
    NotDifferentiable { at: f64, width: f64 },

    #[error("target {target} is outside the achievable range of {what}")]
    OutOfRange { target: f64, what: &'static str },

    #[error("slope {slope} is not a subgradient at zero (subdifferential is [{lo}, {hi}])")]
    NotASubgradient { slope: f64, lo: f64, hi: f64 },

    #[error("function must be normalized with g(0) = 0, got g(0) = {0}")]
    NotNormalized(f64),

    #[error("wrong case: {0}")]
    WrongCase(String),

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("infeasible partition: {0}")]
    InfeasiblePartition(String),

    #[error("dimension guard: {0}")]
    Dimension(String),

    #[error("{what} count {count} exceeds the limit {limit}")]
    SizeLimit {
        what: &'static str,
        count: u128,
        limit: u128,
    },

    #[error("problem is infeasible")]
    Infeasible,

    #[error("solver failure: {0}")]
    Solver(String),

    #[error("unsupported in this format: {0}")]
    Unsupported(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("verification mismatch: {0}")]
    Mismatch(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
