//! Error type shared by every pipeline stage.

use std::path::PathBuf;

use thiserror::Error;

/// Coarse error category, used to pick a process exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    Data,
    Numeric,
}

impl ErrorKind {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorKind::Config => 2,
            ErrorKind::Data => 3,
            ErrorKind::Numeric => 4,
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {field}: {reason}")]
    Config { field: String, reason: String },

    #[error("{0}")]
    InvalidArgument(String),

    #[error("structural error: {0}")]
    Structure(String),

    #[error("missing column '{0}'")]
    MissingColumn(String),

    #[error("row '{row}', column '{column}': {reason} (value {value:?})")]
    Cell {
        row: String,
        column: String,
        value: String,
        reason: String,
    },

    #[error("duplicate respondent id '{0}'")]
    DuplicateId(String),

    #[error("degenerate data: {0}")]
    Degenerate(String),

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {residual:e})")]
    NoConvergence { sweeps: usize, residual: f64 },

    #[error("cannot pick {wanted} centroids: only {found} distinct points")]
    TooFewDistinctPoints { wanted: usize, found: usize },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("stage '{stage}' failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Stage { source, .. } => source.kind(),
            Error::Config { .. } | Error::InvalidArgument(_) => ErrorKind::Config,
            Error::NonFinite(_)
            | Error::Degenerate(_)
            | Error::NoConvergence { .. }
            | Error::TooFewDistinctPoints { .. } => ErrorKind::Numeric,
            _ => ErrorKind::Data,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
