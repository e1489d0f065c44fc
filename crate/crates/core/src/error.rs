use thiserror::Error;

/// Errors raised by the simulation and theory routines.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter violates the documented precondition of an operation.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// The dense Hermitian eigensolver did not converge.
    #[error("eigensolver failed for realization {realization}")]
    Eigensolver { realization: usize },

    #[error("quadrature did not converge: estimate {estimate}, error {error_estimate}")]
    Quadrature { estimate: f64, error_estimate: f64 },

    /// A density matrix with significantly negative spectrum was passed in.
    #[error("invalid density matrix: {0}")]
    InvalidState(String),
}

impl Error {
    /// True when the error stems from bad user input rather than a numerical failure.
    pub fn is_input_error(&self) -> bool {
        matches!(self, Error::InvalidInput(_) | Error::DimensionMismatch { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}
