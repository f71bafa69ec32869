//! ART2 clustering of client request patterns, and a discrete-event cloud
//! simulator that uses the learned clusters to pre-allocate instances and
//! prefetch objects.
//!
//! * [`art2`] is the neural network.
//! * [`features`] turns request logs into normalized pattern vectors.
//! * [`workload`] generates synthetic traces with planted client clusters.
//! * [`simulator`] runs a trace against a baseline or ART2-driven policy.
//! * [`experiment`] runs policy comparisons over a matrix of cells.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod art2;
pub mod experiment;
pub mod features;
pub mod simulator;
pub mod workload;

pub use art2::{Art2Error, Art2Network, Art2Params, ClusterAssignment, F1State};
pub use features::{PatternVector, ReferenceCounts, RequestLogRecord};
pub use simulator::{Request, RequestKind, SimConfig, SimMetrics, Slack};
pub use workload::{Workload, WorkloadSpec};
