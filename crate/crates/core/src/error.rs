use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("node index {index} out of range for graph with {n_nodes} nodes")]
    IndexOutOfRange { index: usize, n_nodes: usize },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error("undefined: {0}")]
    Undefined(String),

    #[error("cluster {0} has zero degree mass")]
    DegenerateCluster(usize),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("budget {budget} infeasible: {needed} required")]
    InfeasibleBudget { budget: f64, needed: f64 },

    #[error("{requested} candidate pairs requested, {available} available")]
    InsufficientCandidates { requested: usize, available: usize },

    #[error("training split contains a single class")]
    DegenerateSplit,

    #[error("non-finite loss at epoch {epoch}: {detail}")]
    NonFinite { epoch: usize, detail: String },

    #[error("training ran zero epochs")]
    NoEpochs,
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn dim(msg: impl Into<String>) -> Self {
        Error::Dimension(msg.into())
    }
}
