//! Error taxonomy shared by every module.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Construction parameters violate a documented precondition.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// An operation was handed data it cannot act on.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A mesh or surgery step produced (or would produce) degenerate geometry.
    #[error("geometry error: {0}")]
    Geometry(String),

    /// A linear solve or factorization failed to meet its residual contract.
    #[error("numerical failure: {message} (relative residual {residual:e})")]
    Numerical { message: String, residual: f64 },

    /// Singular-value profile has no decisive multiplicative gap, or the
    /// detected rank is odd. Carries the profile for reporting.
    #[error("indeterminate rank: {message}")]
    IndeterminateRank {
        message: String,
        gap_factor: f64,
        profile: Vec<f64>,
    },

    /// Neumann series stopped contracting.
    #[error("series divergence: term norms stopped decreasing (sup |mu| = {sup_mu})")]
    Divergence { sup_mu: f64 },

    /// Dilatation composition hit a (near) zero denominator.
    #[error("singular composition: denominator magnitude {min_denom:e} below 1e-6")]
    SingularComposition { min_denom: f64 },

    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid_config(msg: impl Into<String>) -> Self {
        Error::InvalidConfig(msg.into())
    }
    pub(crate) fn invalid_input(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
    pub(crate) fn geometry(msg: impl Into<String>) -> Self {
        Error::Geometry(msg.into())
    }
}
