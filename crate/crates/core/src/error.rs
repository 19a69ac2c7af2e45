use thiserror::Error;

use crate::graph::{EdgeId, VertexId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("vertex {vertex} out of range for n = {n}")]
    VertexOutOfRange { vertex: VertexId, n: usize },
    #[error("self-loop at vertex {0}")]
    SelfLoop(VertexId),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(VertexId, VertexId),
    #[error("client-server edge ({0}, {1}) carries neither flag")]
    MissingFlags(VertexId, VertexId),
    #[error("total edge weight overflows 64 bits")]
    WeightOverflow,
    #[error("stretch k must be at least 1, got {0}")]
    InvalidStretch(usize),
    #[error("edge subset sized for {capacity} edges used with a graph of {m} edges")]
    ForeignSubset { capacity: usize, m: usize },
    #[error("edge {0} is not a server edge")]
    NonServerEdge(EdgeId),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

impl ParseError {
    pub fn new(line: usize, message: impl Into<String>) -> Self {
        ParseError { line, message: message.into() }
    }
}
