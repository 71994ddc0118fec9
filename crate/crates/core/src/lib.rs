//! Reliability and cost models for moving error-corrected logical qubits
//! between the nodes of a quantum multicomputer.
//!
//! * [`codes`]: `[[n,k,d]]` descriptors and concatenated stacks.
//! * [`analytic_model`]: closed-form block and whole-computation failure
//!   probabilities, and the allowable teleportation error rate.
//! * [`monte_carlo`]: seeded, worker-independent simulation of block transfer
//!   over serial or parallel links, including memory errors while waiting.
//! * [`circuit_cut`]: EPR-pair cost of distributed logical-zero creation and
//!   distributed error correction, plus a stabilizer check for encoders.
//! * [`workload`]: logical teleportation counts for Shor's algorithm.
//! * [`link_design`]: serial versus parallel cycle times and recommendation.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic_model;
pub mod circuit_cut;
pub mod codes;
pub mod error;
pub mod link_design;
pub mod monte_carlo;
pub mod tableau;
pub mod workload;

pub use analytic_model::{
    allowable_pt, p_algorithm_failure, p_block_error, p_stack_block_error, p_success_unencoded,
    table3, table3_stacks, AlgorithmFailure, FailureAnalysis, FailureQuery, ModelMode, Table3Row,
};
pub use circuit_cut::{
    cut_costs, default_steane_encoder, inmotion_dqec_cost, static_dqec_cycle_cost,
    steane_713_target, teledata_cost, telegate_cost, validate_encoder, CostMethod, CutCost,
    CutPoint, Direction, EncoderCircuit, Gate, GateKind, InMotionCost, SyndromeSchedule,
};
pub use codes::{builtin_codes, CodeStack, QecCode};
pub use error::{Error, Result};
pub use link_design::{
    cycle_times, recommend, CycleTimes, Recommendation, Thresholds, TimingParams,
};
pub use monte_carlo::{
    combined_failure_analytic, faulty_count_histogram, serial_penalty_mc, serial_penalty_report,
    simulate_block_transfer, wilson_interval, LinkParams, McConfig, McEstimate, McRatio,
    McSettings, Multiplexing, SerialPenaltyReport,
};
pub use workload::{teleport_count, Adder, TeleportCount, WorkloadSpec};
