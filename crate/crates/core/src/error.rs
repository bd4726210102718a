use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A physical argument fell outside the region where the model is defined.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: String, reason: String },

    #[error("amplitude evaluation failed at bin (k_s={k_s}, lambda_s={lambda_s}, k_i={k_i}, lambda_i={lambda_i}): {source}")]
    Bin {
        k_s: usize,
        lambda_s: usize,
        k_i: usize,
        lambda_i: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("frame {frame_index}: {reason}")]
    Frame { frame_index: u64, reason: String },

    #[error("sink rejected frame {frame_index}: {source}")]
    Sink {
        frame_index: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("empty region: {0}")]
    EmptyRegion(String),

    #[error("fit failed after {iterations} iterations: {reason}")]
    FitFailed { reason: String, iterations: usize },

    #[error("format error at byte {offset}: {reason}")]
    Format { offset: u64, reason: String },

    #[error("config error at `{path}`: {reason}")]
    Config { path: String, reason: String },

    #[error("linear algebra failure: {0}")]
    LinearAlgebra(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(field: &str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field: field.to_string(),
            reason: reason.into(),
        }
    }
}
