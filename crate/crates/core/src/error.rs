//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// An operation was called with inputs that violate its contract.
    #[error("contract violation: {0}")]
    Contract(String),

    /// Invalid or inconsistent configuration.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// Malformed or unsupported input file contents.
    #[error("format error: {0}")]
    Format(String),

    /// The requested reverberation time is not realizable for the geometry.
    #[error("infeasible room: {0}")]
    InfeasibleRoom(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("WAV error: {0}")]
    Wav(#[from] hound::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code for the CLI: 2 for configuration/contract problems,
    /// 3 for I/O and file-format problems.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Contract(_) | Error::Config(_) | Error::InfeasibleRoom(_) => 2,
            Error::Io(_) | Error::Wav(_) | Error::Format(_) | Error::Json(_) => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
