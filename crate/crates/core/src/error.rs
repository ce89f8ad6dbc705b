use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of a function.
    #[error("domain error: {0}")]
    Domain(String),

    /// A value lies outside the range a function can produce or invert.
    #[error("range error: {0}")]
    Range(String),

    /// A series did not reach its requested tail bound within the term cap.
    #[error("truncation error: tail bound {bound:e} above tolerance {tolerance:e} after {terms} terms")]
    Truncation { bound: f64, tolerance: f64, terms: usize },

    #[error("invalid input: {0}")]
    Validation(String),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    /// An internal invariant failed. Never expected; signals a bug.
    #[error("invariant violation: {0}")]
    Invariant(String),
}

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
