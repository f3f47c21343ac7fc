use std::path::PathBuf;

/// Errors produced anywhere in the phoneboost pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed file format: {0}")]
    Format(String),

    #[error("unsupported format: {field} is {found}, expected {expected}")]
    UnsupportedFormat {
        field: &'static str,
        found: String,
        expected: &'static str,
    },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("unknown phone label `{0}`")]
    UnknownLabel(String),

    #[error("{0}")]
    Model(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
