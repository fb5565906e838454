//! Crate-wide error type.

use thiserror::Error;

/// Errors reported by the library.
///
/// `Precondition` covers violated hypotheses of the underlying lemmas and
/// theorems (the caller asked for something the statement does not cover);
/// `Falsification` marks a measured violation of a proven statement and is
/// always a bug — either here or in the input data.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension limit: {0}")]
    DimensionLimit(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("input is not normalized: {0}")]
    NotNormalized(String),

    #[error("basis is not orthonormal: {0}")]
    NotOrthonormal(String),

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("degenerate pose: {0}")]
    DegeneratePose(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("search exhausted: {0}")]
    SearchExhausted(String),

    #[error("process did not separate after {steps} steps")]
    NotSeparated { steps: usize },

    #[error("query {query} lies on the separator of every copy")]
    QueryOnSeparator { query: usize },

    #[error("falsification: {0}")]
    Falsification(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
