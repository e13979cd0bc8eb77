//! Error type shared by every module in the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A configuration field failed validation.
    #[error("configuration error in `{field}`: {message}")]
    Config { field: String, message: String },

    /// An operation received an argument outside its domain.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A matrix that must be symmetric positive definite is not.
    #[error("matrix is not symmetric positive definite: {0}")]
    NotSpd(String),

    /// Paired sequences have incompatible lengths.
    #[error("length mismatch: {0}")]
    LengthMismatch(String),

    /// Monte Carlo aggregation was asked to summarize zero usable runs.
    #[error("all {0} runs diverged; nothing to aggregate")]
    AllRunsDiverged(usize),

    /// Too few runs for a pooled statistic to be meaningful.
    #[error("diagnostics need at least {need} runs, got {got}")]
    InsufficientRuns { got: usize, need: usize },
}

impl Error {
    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    pub fn invalid(message: impl Into<String>) -> Self {
        Error::InvalidInput(message.into())
    }
}
