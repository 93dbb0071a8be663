use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read or write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Format {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("stage `{stage}`: {required} required, run `dissbus {command}` first")]
    MissingStage {
        stage: &'static str,
        required: &'static str,
        command: &'static str,
    },

    #[error("labeling service: {0}")]
    Service(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn format(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            line,
            message: message.into(),
        }
    }

    /// Process exit code used by the CLI: 1 validation, 2 I/O, 3 parameter.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. } | Error::Service(_) => 2,
            Error::Parameter(_) => 3,
            Error::Format { .. } | Error::Validation(_) | Error::MissingStage { .. } => 1,
        }
    }
}
