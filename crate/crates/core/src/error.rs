use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("{operation} requires {expected} visible units")]
    VisibleKindMisuse {
        operation: &'static str,
        expected: &'static str,
    },

    #[error("non-finite value during {stage} at epoch {epoch}")]
    NumericOverflow { stage: &'static str, epoch: usize },

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("degenerate clustering: {0}")]
    DegenerateClustering(String),

    #[error("insufficient consensus: {surviving} cluster(s) survived voting, need at least 2")]
    InsufficientConsensus { surviving: usize },

    #[error("metric undefined: {0}")]
    MetricUndefined(&'static str),

    #[error("parse error at row {row}, column {column}: {message}")]
    Parse {
        row: usize,
        column: usize,
        message: String,
    },

    #[error("model file error: {0}")]
    ModelFormat(String),

    #[error("{stage} stage failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// Innermost error, skipping stage wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            other => other,
        }
    }
}
