use thiserror::Error;

/// Errors raised by the laboratory.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A parameter bundle violates one of its standing assumptions.
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// Adaptive quadrature stopped before reaching the requested accuracy.
    #[error("quadrature did not converge: achieved error {achieved:.3e}, requested {requested:.3e}")]
    Quadrature { achieved: f64, requested: f64 },

    /// The symmetric-function order lies outside `1..=n`.
    #[error("order k = {k} outside 1..={n}")]
    OrderOutOfRange { k: usize, n: usize },

    /// An eigenvalue of the p-matrix is singular at this point.
    #[error("singular eigenvalue: {0}")]
    Singular(String),

    /// A value left the range of `f64`.
    #[error("overflow: {0}")]
    Overflow(String),

    /// A requested limit does not exist for these parameters.
    #[error("limit unavailable: {0}")]
    LimitUnavailable(String),
}

pub type Result<T> = std::result::Result<T, Error>;
