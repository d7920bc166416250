//! Randomized minimum cut computed by a synchronous message-passing protocol.
//!
//! [`graph`] holds the input model and generators, [`protocol`] the per-node
//! state machine, [`engine`] the lockstep simulator that drives it,
//! [`oracles`] centralized reference answers, and [`harness`] the experiment
//! drivers behind the `dmincut` binary.

pub mod engine;
pub mod graph;
pub mod harness;
pub mod oracles;
pub mod protocol;

pub use engine::{run_experiment, run_trial, CutResult, EngineConfig, EngineError, Experiment, TrialMetrics};
pub use graph::{parse_edge_list, GenSpec, Graph, GraphError, NodeId, Weight};
