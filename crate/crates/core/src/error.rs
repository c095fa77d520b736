use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Broad failure class, used by the command-line driver to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Category {
    Config,
    Input,
    Backend,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("config: {field}: {message}")]
    Config { field: String, message: String },

    #[error("{path}: {message}")]
    Input { path: PathBuf, message: String },

    #[error("{path}:{line}: {message}")]
    Format {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("embedding backend: {message}")]
    Backend { message: String, retriable: bool },

    #[error("{0}")]
    Invalid(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn backend(message: impl Into<String>, retriable: bool) -> Self {
        Error::Backend {
            message: message.into(),
            retriable,
        }
    }

    pub fn category(&self) -> Category {
        match self {
            Error::Config { .. } | Error::Invalid(_) => Category::Config,
            Error::Input { .. } | Error::Format { .. } | Error::Io { .. } => Category::Input,
            Error::Backend { .. } => Category::Backend,
        }
    }

    pub fn is_retriable(&self) -> bool {
        matches!(
            self,
            Error::Backend {
                retriable: true,
                ..
            }
        )
    }
}
