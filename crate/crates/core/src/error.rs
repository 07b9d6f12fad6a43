use thiserror::Error;

/// Errors raised by the numerical and modelling layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("near-singular evaluation: {0}")]
    NearSingular(String),

    /// A density was non-finite at a preimage; `branch` is the offending branch (0-based).
    #[error("singular density evaluation at branch {branch}")]
    SingularEvaluation { branch: usize },

    #[error("model inconsistency: {0}")]
    ModelInconsistency(String),

    #[error("state-space integrity violated: {0}")]
    Integrity(String),

    #[error("quadrature did not converge (estimate {estimate}, error {error_estimate})")]
    NotConverged { estimate: f64, error_estimate: f64 },

    #[error("singularity exposure: {rejected} of {n} evaluations were non-finite")]
    SingularityExposure { rejected: usize, n: usize },

    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
