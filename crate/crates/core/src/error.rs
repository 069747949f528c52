use thiserror::Error;

use crate::analysis::Violation;
use crate::graph::NodeId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("round {t} is past the end of an explicit sequence of {len} rounds")]
    OutOfRange { t: u64, len: usize },

    #[error("non-finite value: {0}")]
    Numeric(String),

    /// A node was asked to talk to a peer it has no ledger entry for.
    #[error("node {node} has no ledger entry for peer {peer} at round {t}")]
    ProtocolOrder { node: NodeId, peer: NodeId, t: u64 },

    #[error("protocol violation at node {node}, round {t}: {detail}")]
    ProtocolViolation { node: NodeId, t: u64, detail: String },

    #[error("degree bound {bound} for edge {a}-{b} at round {t} is below max degree {max_degree}")]
    PolicyViolation {
        a: NodeId,
        b: NodeId,
        t: u64,
        bound: f64,
        max_degree: usize,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("value of node {node} diverged at round {t}")]
    Divergence { node: NodeId, t: u64 },

    #[error("active pair {a}-{b} at round {t} has equal values; weight is undefined")]
    DegeneratePair { a: NodeId, b: NodeId, t: u64 },

    #[error("{} invariant violation(s) at round {t}; first: {}", .violations.len(), .violations[0])]
    Invariant { t: u64, violations: Vec<Violation> },

    #[error("bound term `{0}` overflows double precision")]
    BoundOverflow(&'static str),
}

pub(crate) fn argument(msg: impl Into<String>) -> Error {
    Error::Argument(msg.into())
}
