use thiserror::Error;

use crate::algebra::CoefSeq;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("exponent overflow multiplying z^{left} by z^{right}")]
    ExponentOverflow { left: u64, right: u64 },

    #[error("exponent collision at z^{exponent} (z^{left} * z^{right})")]
    ExponentCollision {
        exponent: u64,
        left: u64,
        right: u64,
    },

    #[error("size limit exceeded: {0}")]
    Limit(String),

    #[error(
        "solver did not converge after {iterations} iterations (residual norm {grad_norm:.3e})"
    )]
    NonConvergence {
        iterations: usize,
        grad_norm: f64,
        last_iterate: Box<CoefSeq>,
    },

    #[error("verification failed: {0}")]
    Verification(String),

    #[error("malformed input: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
