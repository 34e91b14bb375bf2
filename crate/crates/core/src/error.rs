use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("singularity: {0}")]
    Singularity(String),

    #[error("resolution error: {message} (suggested grid: {suggested})")]
    Resolution { message: String, suggested: usize },

    #[error("divergent integral: {0}")]
    Divergence(String),

    #[error("inadmissible potential: norm {norm} is {reason}")]
    Admissibility { norm: String, reason: String },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("refinement did not converge: {0}")]
    NotConverged(String),

    #[error("non-monotone counts during bisection: {0}")]
    NonMonotone(String),
}

pub type Result<T> = std::result::Result<T, Error>;
