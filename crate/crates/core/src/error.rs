use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("point is not strictly inside the unit ball (|z|^2 = {0})")]
    OutsideBall(f64),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid space parameters: {0}")]
    InvalidParams(String),

    #[error("negative input where a nonnegative value is required: {0}")]
    Negative(f64),

    #[error("functions live in different spaces")]
    ParamsMismatch,

    #[error("family is linearly dependent at index {0}")]
    RankDeficient(usize),

    #[error("degree {degree} exceeds the configured cap {cap}")]
    DegreeCap { degree: usize, cap: usize },

    #[error("integration failed: non-finite integrand at z = {z:?}")]
    IntegrationFailure { z: Vec<[f64; 2]> },

    #[error("integral diverges under refinement")]
    Divergent,

    #[error("invalid probe: {0}")]
    InvalidProbe(String),

    #[error("analytic gradient disagrees with finite differences (relative error {0:e})")]
    GradientCheck(f64),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
