use thiserror::Error;

/// Errors raised by basis construction, operator algebra and time evolution.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported statistics: {0}")]
    InvalidStatistics(String),

    #[error("basis dimension {dim} exceeds the configured cap of {cap}")]
    Capacity { dim: u128, cap: usize },

    #[error("{what} index {index} out of range (< {len})")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        len: usize,
    },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("basis has no radiation mode")]
    NoRadiationMode,

    #[error("mode weights are not orthonormal (residual {residual:e})")]
    NotOrthonormal { residual: f64 },

    #[error("eigensolver failure: {0}")]
    Eigensolver(String),

    #[error("internal consistency check failed: {0}")]
    Consistency(String),

    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepSizeUnderflow { t: f64, h: f64 },

    #[error("step limit of {max_steps} exceeded at t = {t}")]
    MaxSteps { max_steps: usize, t: f64 },

    #[error("positivity violated at t = {t}: minimum eigenvalue {min_eigenvalue:e}")]
    PositivityViolation { t: f64, min_eigenvalue: f64 },

    #[error("non-finite value encountered at t = {t}")]
    NonFinite { t: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
