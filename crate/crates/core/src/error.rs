use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{0}")]
    Io(#[from] io::Error),

    #[error("self-loop at line {line}")]
    SelfLoop { line: usize },

    #[error("malformed line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("node {node} out of range (graph has {node_count} nodes)")]
    NodeOutOfRange { node: usize, node_count: usize },

    #[error("{candidate} is not a neighbor of {current}")]
    NotANeighbor { current: usize, candidate: usize },

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("point outside the Poincare ball (norm {norm})")]
    OutsideBall { norm: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite input at position {0}")]
    NonFinite(usize),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("not enough samples: {0}")]
    InsufficientData(String),

    #[error("unknown variant {0:?}")]
    UnknownVariant(String),

    #[error("unmapped node {0}")]
    Unmapped(usize),

    #[error("bad model file: {0}")]
    ModelFormat(String),
}
