use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A label or prediction file line failed validation.
    #[error("{cause}, line {line}")]
    Label { line: usize, cause: String },

    #[error("config: {0}")]
    Config(String),

    #[error("cvat: {0}")]
    Cvat(String),

    #[error("image: {0}")]
    Image(String),

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("dataset: {0}")]
    Dataset(String),

    /// Any other error, tagged with the file it came from.
    #[error("{}: {source}", path.display())]
    InFile { path: PathBuf, source: Box<Error> },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn in_file(path: impl Into<PathBuf>, source: Error) -> Self {
        match source {
            e @ (Error::Io { .. } | Error::InFile { .. }) => e,
            e => Error::InFile {
                path: path.into(),
                source: Box::new(e),
            },
        }
    }

    pub(crate) fn label(line: usize, cause: impl Into<String>) -> Self {
        Error::Label {
            line,
            cause: cause.into(),
        }
    }

    /// Broad category used by front ends to pick an exit status.
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::InvalidParam(_) => ErrorKind::Validation,
            Error::Io { .. } => ErrorKind::Io,
            Error::InFile { source, .. } => source.kind(),
            _ => ErrorKind::Data,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Validation,
    Data,
    Io,
}
