//! Average consensus with ternary messages on time-varying undirected graphs.
//!
//! Nodes exchange one symbol from `{-1, 0, +1}` per neighbour per round,
//! keep per-neighbour estimates rebuilt from those symbols, and move toward
//! neighbours whose estimates are both settled and far away. The crate holds
//! the graph-sequence model, the per-node protocol, a synchronous round
//! engine, a real-valued Metropolis baseline and analysis tooling (metrics,
//! lemma-invariant checks, the convergence-time bound).

pub mod analysis;
pub mod engine;
pub mod error;
pub mod graph;
pub mod metropolis;
pub mod protocol;

pub use analysis::{
    above_quantization_floor, compute_metrics, reconstruct_matrix, theorem_bound, validate_matrix, validate_round,
    Baseline, BoundInputs, BoundTerms, Check, Dispersion, EffectiveMatrix, MetricsRow, RoundValidator, Violation,
};
pub use engine::{
    init_state, run, run_round, run_with, InitSpec, RecordLevel, RoundRecord, RoundView, RunOutput, RunSummary,
    SimulationConfig, World,
};
pub use error::{Error, Result};
pub use graph::{check_core_connected, CoreCheck, Edge, GraphSequence, GraphSnapshot, NodeId, SequenceKind};
pub use metropolis::{metropolis_round, run_metropolis, MetropolisConfig};
pub use protocol::{
    quantize, DegreeBoundPolicy, EstimateLedger, LedgerEntry, Message, NodeState, PairBound, ProtocolParams, Ternary,
    Variant,
};
