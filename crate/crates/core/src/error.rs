//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Window or region would exceed the dense-matrix dimension cap.
    #[error("window of {sites} sites exceeds the dimension cap of 2^{cap} ")]
    DimensionCap { sites: usize, cap: u32 },

    /// Matrix shape mismatch or malformed input.
    #[error("shape error: {0}")]
    Shape(String),

    /// A documented precondition of an operation was violated.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Parameter outside the mathematical domain (e.g. β ≤ 0, non-faithful state).
    #[error("domain error: {0}")]
    Domain(String),

    /// An input failed a structural contract (e.g. non-Hermitian perturbation,
    /// mixed parity where a definite parity is required).
    #[error("contract violated: {0}")]
    Contract(String),

    /// An internal invariant that should hold by construction failed; this
    /// signals a bug or a truncation artifact, not a user error.
    #[error("invariant violated: {0}")]
    Invariant(String),

    /// Fermionic product extension requested outside the supported case
    /// (even states across a contiguous left/right cut).
    #[error("unsupported product extension: {0}")]
    UnsupportedExtension(String),

    /// Model outside the supported class (e.g. non-quadratic potential on the
    /// Gaussian fast path).
    #[error("unsupported model: {0}")]
    UnsupportedModel(String),

    /// LAPACK driver failure (nonzero info).
    #[error("eigensolver failed with info = {0}")]
    Eigensolver(i32),
}

pub type Result<T> = std::result::Result<T, Error>;
