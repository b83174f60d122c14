//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by distribution evaluation, quadrature construction,
/// data validation and model fitting.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// An argument fell outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// An evaluation produced a non-finite value where a finite one is required.
    #[error("non-finite evaluation: {0}")]
    NonFinite(String),
    /// Input data failed validation (boundary responses, rank deficiency, ...).
    #[error("invalid data: {0}")]
    Data(String),
    /// An optimizer could not make progress from the supplied start.
    #[error("optimization failed: {0}")]
    Optim(String),
}

pub type Result<T> = std::result::Result<T, Error>;
