use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid resolution: n = {0} (need n >= 8)")]
    InvalidResolution(usize),
    #[error("invalid manifold spec: {0}")]
    InvalidSpec(String),
    #[error("invalid arguments: {0}")]
    InvalidArguments(String),
    #[error("pressure projection failed to converge (relative residual {residual:.3e} after {iterations} iterations)")]
    ProjectionFailure { residual: f64, iterations: usize },
    #[error("time step failed at t = {t:.6e}: {reason}")]
    StepFailure { t: f64, reason: String },
    #[error("rejected input: {0}")]
    RejectedInput(String),
    #[error("unsupported input: {0}")]
    UnsupportedInput(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
