use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = ErgmError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum ErgmError {
    #[error("graph must have at least one node")]
    EmptyGraph,

    #[error("node index {index} out of range for a graph with {n} nodes")]
    NodeOutOfRange { index: usize, n: usize },

    #[error("self-loop ({0}, {0}) is not a valid dyad")]
    SelfLoop(usize),

    #[error("{op} requires an undirected graph")]
    RequiresUndirected { op: &'static str },

    #[error("directedness mismatch: model is {model}, graph is {graph}")]
    DirectednessMismatch {
        model: &'static str,
        graph: &'static str,
    },

    #[error("term `{term}` is not defined for {kind} graphs")]
    IncompatibleTerm { term: String, kind: &'static str },

    #[error("unknown statistic term `{0}`")]
    UnknownTerm(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },

    #[error("checksum mismatch for {path}: expected {expected}, found {found}")]
    Checksum {
        path: PathBuf,
        expected: String,
        found: String,
    },

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("series is too short: need more than {need} values, got {got}")]
    SeriesTooShort { need: usize, got: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl ErgmError {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        ErgmError::Config(msg.into())
    }
}
