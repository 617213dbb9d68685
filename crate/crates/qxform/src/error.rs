//! Error taxonomy shared by every module.
//!
//! The variants are grouped by how a caller should react: `Dimension`,
//! `Parameter` and `Unsupported` mean the inputs were bad before any
//! numerics ran; `Singularity`, `Convergence` and `Truncation` mean the
//! computation itself broke down and rerunning with the same inputs will
//! break down identically.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("singularity: {0}")]
    Singularity(String),

    #[error("convergence failure: {0}")]
    Convergence(String),

    #[error("truncation error: {0}")]
    Truncation(String),

    #[error("non-finite value encountered in {0}")]
    NonFinite(String),
}

impl Error {
    /// True when the error indicates bad inputs rather than a numerical
    /// breakdown. Used by the CLI to pick exit codes.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Dimension(_) | Error::Parameter(_) | Error::Unsupported(_)
        )
    }
}
