//! Error type shared by every module.

use thiserror::Error;

/// Errors raised by the toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum CrbError {
    /// Invalid user configuration (grid, parameters, preset names).
    #[error("configuration error: {0}")]
    Config(String),
    /// Input data violates a structural requirement such as symmetry.
    #[error("data error: {0}")]
    Data(String),
    /// A documented precondition does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),
    /// Argument outside the mathematical domain of a function.
    #[error("domain error: {0}")]
    Domain(String),
    /// Two fields live on different grids.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    /// A time stepper produced non-finite values.
    #[error("numerical divergence at t = {t}: {what}")]
    Divergence {
        /// Time at which the failure was detected.
        t: f64,
        /// Description of the offending quantity.
        what: String,
    },
    /// Requested feature outside the supported scope.
    #[error("unsupported: {0}")]
    Unsupported(String),
}

/// Result alias.
pub type Result<T> = std::result::Result<T, CrbError>;
