//! Error taxonomy shared by the whole crate.
//!
//! The variants map onto the failure classes the CLI distinguishes by exit
//! code: configuration problems, shape mismatches, numeric blow-ups, data
//! ingestion failures, and I/O.

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid configuration value (bad model spec, bad allocation request, ...).
    #[error("configuration error: {0}")]
    Config(String),

    /// Vector/matrix dimensions do not line up.
    #[error("shape error: {0}")]
    Shape(String),

    /// Non-finite value encountered during computation.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// Malformed or inconsistent input data.
    #[error("data error: {0}")]
    Data(String),

    /// Argument outside the mathematical domain of a formula.
    #[error("domain error: {0}")]
    Domain(String),

    /// A batch allocation that cannot be satisfied by the clusters.
    #[error("allocation error: {0}")]
    Allocation(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Shorthand used by validation code.
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn shape(msg: impl Into<String>) -> Self {
        Error::Shape(msg.into())
    }

    pub fn data(msg: impl Into<String>) -> Self {
        Error::Data(msg.into())
    }
}
