//! Error types shared by every module of the crate.

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum JamError {
    /// A value lies outside the mathematical domain of an operation
    /// (e.g. a Zadoff-Chu index beyond 61, a nonpositive power).
    #[error("domain error: {0}")]
    Domain(String),

    /// Structurally inconsistent inputs (length/shape mismatches).
    #[error("structural error: {0}")]
    Structural(String),

    /// Degenerate input that admits no meaningful output
    /// (e.g. all-zero reference power in an EVM computation).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// Invalid configuration value.
    #[error("config error: {0}")]
    Config(String),

    /// Underlying I/O failure.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// Malformed serialized artifact (manifest, checkpoint, config file).
    #[error("format error: {0}")]
    Format(String),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, JamError>;
