//! Error types shared across the crate.

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid configuration, including quantizer/topology/schedule parameter violations.
    #[error("configuration error: {0}")]
    Config(String),

    /// Vector length does not match the configured dimension.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// Input contained NaN or infinite entries.
    #[error("non-finite input: {0}")]
    NonFiniteInput(String),

    /// A closed-form rule was evaluated outside its validity region
    /// (e.g. the interval optimizer with 1 + q1 >= n/s).
    #[error("condition violated: {0}")]
    ConditionViolated(String),

    /// A loss-driven rule received a non-positive loss value.
    #[error("invalid loss value: {0}")]
    InvalidLoss(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Stable machine-readable error category.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Config(_) => "config",
            Error::DimensionMismatch { .. } => "dimension-mismatch",
            Error::NonFiniteInput(_) => "non-finite-input",
            Error::ConditionViolated(_) => "condition-violated",
            Error::InvalidLoss(_) => "invalid-loss",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
            Error::Csv(_) => "csv",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
