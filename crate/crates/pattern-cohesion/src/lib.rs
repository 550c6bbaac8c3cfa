//! Pattern clustering built on a counting mechanism: every stored pattern
//! instance keeps per-node reinforcement weights plus paired individual and
//! group counters, and the gap between the counters tells coherent members
//! from out-of-character ones.
//!
//! The crate provides:
//! - a persistent [`model::PatternStore`] of pattern instances with
//!   per-node count records,
//! - presentation-driven updates and decay ([`reinforcement`]),
//! - node-level cohesion tests and whole-pattern cohesion scores
//!   ([`cohesion`]),
//! - cohesion-guided split evaluation and search ([`split`]),
//! - excitation/inhibition activation dynamics over discrete intervals
//!   ([`activation`]),
//! - a dataset benchmark comparing per-category cohesion with a chi-square
//!   baseline ([`bench`]),
//! - and the command-line driver behind the `pattern-cohesion` binary
//!   ([`cli`]).
//!
//! The runnable examples under `examples/` walk through each capability;
//! start with `counting_updates`.

pub mod activation;
pub mod bench;
pub mod cli;
pub mod cohesion;
pub mod model;
pub mod reinforcement;
pub mod split;

pub use activation::{ActivationState, ActivationTrace};
pub use bench::{build_report, synthetic_segment_table, BenchReport, DatasetTable, TableSchema};
pub use cohesion::{
    instance_cohesion, pattern_cohesion, CohesionReport, CohesionThreshold, CountFactorMode,
};
pub use model::{CountRecord, InputPattern, NodeId, PatternId, PatternInstance, PatternStore};
pub use reinforcement::{present, UpdateConfig};
pub use split::{
    brute_force_best_split, evaluate_split, rank_single_removals, recalc_stats, suggest_split,
    SplitPartition,
};
