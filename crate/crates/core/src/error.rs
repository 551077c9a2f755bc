use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("graph needs at least {min} nodes, got {got}")]
    TooFewNodes { min: usize, got: usize },

    #[error("edge probability {0} is outside [0, 1]")]
    InvalidProbability(f64),

    #[error("edge ({from} -> {to}) is invalid for a graph on {n} nodes")]
    InvalidEdge { from: usize, to: usize, n: usize },

    #[error("graph is not strongly connected")]
    NotStronglyConnected,

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("ratio consensus protocol violation at node {node}: {msg}")]
    Protocol { node: usize, msg: String },

    #[error("singular normal matrix; regenerate the instance")]
    Singular,

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
