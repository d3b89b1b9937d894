use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("graph has no vertices")]
    EmptyGraph,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("vertex {0} not found")]
    NotFound(u64),

    #[error("non-finite vertex state produced in superstep {superstep}")]
    NonFinite { superstep: usize },

    #[error("affinity matrix is all zero")]
    DegenerateAffinity,

    #[error("training data contains a single class")]
    DegenerateLabels,

    #[error("unsupported model version {0}")]
    UnsupportedModelVersion(u64),

    #[error("malformed model file: {0}")]
    ModelFormat(String),

    #[error("insufficient memory: {0}")]
    InsufficientMemory(String),

    #[error("csv: {0}")]
    Csv(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// Stable variant name, printed by the CLI on failure.
    pub fn name(&self) -> &'static str {
        match self {
            Error::Io { .. } => "IoError",
            Error::Parse { .. } => "ParseError",
            Error::EmptyGraph => "EmptyGraph",
            Error::InvalidArgument(_) => "InvalidArgument",
            Error::NotFound(_) => "NotFound",
            Error::NonFinite { .. } => "NonFinite",
            Error::DegenerateAffinity => "DegenerateAffinity",
            Error::DegenerateLabels => "DegenerateLabels",
            Error::UnsupportedModelVersion(_) => "UnsupportedModelVersion",
            Error::ModelFormat(_) => "ModelFormat",
            Error::InsufficientMemory(_) => "InsufficientMemory",
            Error::Csv(_) => "CsvError",
        }
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Csv(e.to_string())
    }
}
