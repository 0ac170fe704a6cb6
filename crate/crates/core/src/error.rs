use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input data (non-finite coordinates, ragged rows, asymmetric matrices).
    #[error("invalid input: {0}")]
    Input(String),

    /// A caller-supplied parameter is out of its valid range.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// The input is well-formed but cannot produce a meaningful result.
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// A parent array or tree violates the single-root / acyclic shape.
    #[error("structural error: {0}")]
    Structural(String),

    /// `SplitMode::PrefixFast` was asked to split on a center set that is not a gamma prefix.
    #[error("mode violation: {0}")]
    ModeViolation(String),

    /// Baseline assignment left a point without a label.
    #[error("incomplete assignment: point {point} never reaches a center")]
    IncompleteAssignment { point: usize },

    #[error("{}: line {line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }
}
