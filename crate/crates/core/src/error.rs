use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// Exhaustive enumeration refused because `2^n` configurations exceed the guard.
    #[error("kernel size {n} exceeds the enumeration guard of {limit}; an explicit override is required")]
    GuardExceeded { n: usize, limit: usize },

    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
