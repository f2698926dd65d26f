//! Error type shared across the crate.

use thiserror::Error;

/// Errors produced by model construction, estimation and diagnostics.
#[derive(Debug, Error)]
pub enum Error {
    /// A model parameter or option violates a documented invariant.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A function argument is out of range for the given inputs.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The input data is degenerate (constant, all zero, ...).
    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    /// An estimator could not produce a usable estimate.
    #[error("estimation failed: {0}")]
    Estimation(String),

    /// A numerical routine failed to converge or left its domain.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// An experiment or calibration configuration is inconsistent.
    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
