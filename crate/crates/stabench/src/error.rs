//! Crate-wide error type.

use thiserror::Error;

/// Unified error for all benchmark operations.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid configuration value (bad flag, unknown name, out-of-range field).
    #[error("configuration error: {0}")]
    Config(String),

    /// Input outside an operation's mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// Procedural generation could not satisfy its constraints (e.g. pattern
    /// placement ran out of retries).
    #[error("generation error: {0}")]
    Generation(String),

    /// Internal inconsistency between values that must agree (e.g. a pattern
    /// count without matching mask pixels).
    #[error("inconsistency: {0}")]
    Inconsistency(String),

    /// An explainer or predictor failed during metric evaluation.
    #[error("evaluation error: {0}")]
    Evaluation(String),

    /// Malformed or truncated artifact file.
    #[error("format error: {0}")]
    Format(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("image error: {0}")]
    Image(#[from] image::ImageError),
}

pub type Result<T> = std::result::Result<T, Error>;
