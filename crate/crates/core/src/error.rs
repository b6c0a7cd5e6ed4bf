//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Structural misuse: mismatched bases, wrong degrees, malformed data.
    #[error("structural error: {0}")]
    Structure(String),

    /// Geometric degeneracy: zero-volume simplices, irrational metric data
    /// requested on the exact backend.
    #[error("geometry error: {0}")]
    Geometry(String),

    /// A value was requested beyond the configured truncation; distinct from
    /// a nonzero residual.
    #[error("indeterminate at truncation: {0}")]
    Indeterminate(String),

    /// Convergence gate refused the perturbation series.
    #[error("convergence gate: {0}")]
    Gate(String),

    /// A contraction certificate was required but not granted.
    #[error("certificate not granted: {0}")]
    Certificate(String),

    /// Polynomial degree exceeded the configured cap.
    #[error("polynomial degree cap exceeded: degree {degree} > cap {cap}")]
    DegreeCap { degree: usize, cap: usize },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn structure(msg: impl Into<String>) -> Self {
        Error::Structure(msg.into())
    }
    pub fn geometry(msg: impl Into<String>) -> Self {
        Error::Geometry(msg.into())
    }
}
