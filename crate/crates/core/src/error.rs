use thiserror::Error;

/// Errors produced by the rewiring library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum RawrError {
    #[error("self-loop on node {node} (line {line})")]
    SelfLoop { node: usize, line: usize },

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("graph has no nodes")]
    EmptyGraph,

    #[error("node {node} out of range for graph with {num_nodes} nodes")]
    NodeOutOfRange { node: usize, num_nodes: usize },

    #[error("block sizes sum to {got}, expected {expected}")]
    SizeMismatch { expected: usize, got: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NonSymmetric(f64),

    #[error("eigensolver did not converge after {0} sweeps")]
    EigenNotConverged(usize),

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("graph is disconnected")]
    Disconnected,

    #[error("label matrix has zero energy")]
    EmptyLabels,

    #[error("no node has a labeled two-hop neighbor")]
    NoEligibleNodes,

    #[error("negative input to square root: {0}")]
    NegativeInput(f64),

    #[error("training diverged at epoch {epoch} (loss {loss})")]
    Divergence { epoch: usize, loss: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for RawrError {
    fn from(e: std::io::Error) -> Self {
        RawrError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, RawrError>;
