use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The point lies outside `X = {ΔQ > 0}`.
    #[error("point {z} is not in the strictly subharmonic set (ΔQ = {laplacian})")]
    NotInX { z: Complex64, laplacian: f64 },

    #[error("weight does not support this operation: {0}")]
    UnsupportedWeight(String),

    #[error("evaluation outside the domain: {0}")]
    OutOfDomain(String),

    #[error("polynomial degree constraint violated: {0}")]
    Degree(String),

    #[error("gram matrix is numerically indefinite (condition estimate {condition:.3e}, numerical rank {rank} of {dim})")]
    Conditioning { condition: f64, rank: usize, dim: usize },

    #[error("growth condition violated: {0}")]
    GrowthViolation(String),

    #[error("obstacle solver did not converge after {iterations} sweeps (last update {residual:.3e})")]
    SolverFailure { iterations: usize, residual: f64 },

    #[error("computational domain too small: {0}")]
    DomainTooSmall(String),

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config { path: path.into(), message: message.into() }
    }
}
