use thiserror::Error;

/// Errors raised by constructions and verifiers.
///
/// Verification *refusals* (a certificate condition that does not hold) are
/// returned as values by the individual verifiers; this type is for inputs
/// that violate a precondition or computations that cannot complete.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LabError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("piece-count cap of {cap} exceeded ({needed} pieces needed)")]
    PieceCap { cap: usize, needed: usize },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("internal error: {0}")]
    Internal(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, LabError>;
