use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),

    /// The file is not a well-formed RIFF/WAVE stream.
    #[error("malformed audio file: {0}")]
    Format(String),

    /// Well-formed, but outside what we read (stereo, float, 24-bit, ...).
    #[error("unsupported audio format: {0}")]
    UnsupportedFormat(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("configuration error: {0}")]
    Config(String),

    /// A linear system could not be solved reliably.
    #[error("numerical error: {msg} (condition estimate {condition:.3e})")]
    Numerical { msg: String, condition: f64 },

    /// Levinson recursion met a reflection coefficient with |k| >= 1, or a
    /// synthesis filter blew up.
    #[error("unstable filter: {0}")]
    Instability(String),

    #[error("training error: {0}")]
    Training(String),

    #[error("model load error: {0}")]
    Load(String),
}

impl Error {
    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }

    pub(crate) fn numerical(msg: impl Into<String>, condition: f64) -> Self {
        Error::Numerical {
            msg: msg.into(),
            condition,
        }
    }

    /// Process exit code used by the command-line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 1,
            Error::Io(_)
            | Error::Format(_)
            | Error::UnsupportedFormat(_)
            | Error::Load(_)
            | Error::Precondition(_) => 2,
            Error::Numerical { .. } | Error::Instability(_) | Error::Training(_) => 3,
        }
    }
}
