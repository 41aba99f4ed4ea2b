use thiserror::Error;

use crate::linalg::Direction;
use crate::tree::NodeId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Input values violate a data invariant (non-finite cells, bad label length, ...).
    #[error("invalid data: {0}")]
    Data(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    /// The matrix carries no variance along the requested direction.
    #[error("zero variance: {0}")]
    ZeroVariance(String),

    #[error("power iteration did not converge after {iterations} iterations")]
    Convergence {
        iterations: usize,
        last: Box<Direction>,
    },

    #[error("whitening rank {rank} is below the requested {requested} components")]
    Rank { rank: usize, requested: usize },

    #[error("degenerate split of node {node} at {point}: {reason}")]
    DegenerateSplit {
        node: NodeId,
        point: f64,
        reason: String,
    },

    /// The node was never projected (too small, or no variance).
    #[error("node {0} has no projection")]
    NoProjection(NodeId),

    #[error("tree structure: {0}")]
    Structure(String),

    #[error("parse error at row {row}{}: {message}", column.map(|c| format!(", column {c}")).unwrap_or_default())]
    Parse {
        row: usize,
        column: Option<usize>,
        message: String,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    /// Errors that describe the input data rather than the program configuration.
    pub fn is_data_error(&self) -> bool {
        matches!(
            self,
            Error::Data(_) | Error::Shape(_) | Error::Parse { .. } | Error::Io { .. } | Error::Json(_)
        )
    }

    pub fn is_config_error(&self) -> bool {
        matches!(self, Error::Config(_))
    }
}
