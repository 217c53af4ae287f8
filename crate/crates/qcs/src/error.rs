//! Error type shared by all solvers and parsers.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, QcsError>;

#[derive(Debug, Error)]
pub enum QcsError {
    /// Malformed textual input (edge list or JSON graph).
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// Input violates a construction invariant (duplicate edge, nonpositive
    /// weight, non-bijective map, out-of-range parameter, ...).
    #[error("validation error: {0}")]
    Validation(String),

    /// Argument outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Graph shape makes the requested sum undefined (empty out-neighborhood,
    /// self-loop where forbidden, ...).
    #[error("structure error: {0}")]
    Structure(String),

    /// Problem size exceeds a configured enumeration or grid cap.
    #[error("capacity error: {0}")]
    Capacity(String),

    /// An iterative solver stopped without meeting its tolerance.
    #[error("solver did not converge: {0}")]
    NonConvergence(String),
}

impl QcsError {
    /// Process exit code the CLI maps this error to.
    pub fn exit_code(&self) -> i32 {
        match self {
            QcsError::Capacity(_) => 2,
            _ => 1,
        }
    }
}
