//! ART2 network for analog input patterns.
//!
//! F1 contrast-enhances and normalizes the input, F2 picks the best
//! matching prototype, and the vigilance test either accepts the match
//! (resonance, then learning) or resets the node and searches on. An input
//! that fits no prototype commits a new F2 node.

mod f1;
mod network;
mod params;
mod snapshot;

pub use f1::{activation, reset_required, stabilize_f1, vigilance_residual, F1State};
pub use network::{compete, Art2Network, ClusterAssignment};
pub use params::Art2Params;
pub use snapshot::NetworkSnapshot;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Art2Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("activation is undefined for negative input {0}")]
    Domain(f64),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("input entry {index} = {value} is outside [0, 1]")]
    InputOutOfRange { index: usize, value: f64 },
    #[error("all-zero vector at the {stage} stage cannot be normalized")]
    ZeroVector { stage: &'static str },
    #[error("F1 did not settle within {iterations} cycles (last change {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },
    #[error("network has no committed F2 nodes")]
    EmptyNetwork,
    #[error("node {node} out of range ({committed} committed)")]
    NodeOutOfRange { node: usize, committed: usize },
    #[error("all {max} F2 nodes are committed and none matched")]
    CapacityExhausted { max: usize },
    #[error("invalid network snapshot: {0}")]
    InvalidSnapshot(String),
}
