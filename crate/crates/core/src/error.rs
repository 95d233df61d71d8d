use crate::graph::{EdgeId, NodeId};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("graph has no node {0}")]
    UnknownNode(NodeId),
    #[error("graph has no edge {0}")]
    UnknownEdge(EdgeId),
    #[error("self-loop at node {0}")]
    SelfLoop(NodeId),
    #[error("parallel edge between {0} and {1}")]
    ParallelEdge(NodeId, NodeId),
    #[error("graph is not connected")]
    Disconnected,
    #[error("malformed structure: {0}")]
    Structural(String),
    #[error("node {0} is covered by two matching edges")]
    MatchingConflict(NodeId),
    #[error("walk is not an augmenting path")]
    NotAugmenting,
    #[error("exhaustive enumeration refused: {nodes} nodes exceeds limit {limit}")]
    OracleRefused { nodes: usize, limit: usize },
    #[error("bandwidth violation: node {node} sent {bits} bits on edge {edge} in round {round} (limit {limit})")]
    BandwidthViolation {
        node: NodeId,
        edge: EdgeId,
        round: u64,
        bits: u32,
        limit: u32,
    },
    #[error("node {node} sent twice on edge {edge} in round {round}")]
    DuplicateSend { node: NodeId, edge: EdgeId, round: u64 },
    #[error("node {node} addressed non-incident edge {edge} in round {round}")]
    NotIncident { node: NodeId, edge: EdgeId, round: u64 },
    #[error("no termination within {max_rounds} rounds")]
    NonTermination { max_rounds: u64 },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("no augmenting path: {0}")]
    NoPath(String),
    #[error("round budget exceeded in {phase}: used {used}, budget {budget}")]
    BudgetExceeded { phase: String, used: u64, budget: u64 },
    #[error("internal error: {0}")]
    Internal(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("{context}: {source}")]
    Phase {
        context: String,
        #[source]
        source: Box<Error>,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Wraps the error with the name of the phase it surfaced in.
    pub fn in_phase(self, context: impl Into<String>) -> Error {
        Error::Phase {
            context: context.into(),
            source: Box::new(self),
        }
    }

    /// Innermost error, with phase wrappers removed.
    pub fn root(&self) -> &Error {
        match self {
            Error::Phase { source, .. } => source.root(),
            e => e,
        }
    }
}
