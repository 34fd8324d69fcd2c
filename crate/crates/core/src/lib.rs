//! Offline peak-space scheduling for independent process traces.
//!
//! Given the complete space trace of every process, this crate computes the
//! minimal peak memory over all interleavings and a schedule achieving it,
//! validates results against an exact bottleneck search, and solves small
//! synchronization-constrained instances.

pub mod constraints;
pub mod engine;
pub mod error;
pub mod oracle;
pub mod standardize;
pub mod trace;

pub use constraints::{
    encode_partition, eval_formula, gen_producer_consumer, partition_oracle, solve_constrained,
    BasicRestriction, ConstrainedProblem, ConstraintFormula, TimePointRef, TimedSchedule,
};
pub use engine::{
    eager_schedule, end_index, reconstruct_schedule, scan, spoptn, Direction, ScanEvent,
    ScanResult, SpminResult,
};
pub use error::{Error, Result};
pub use oracle::{
    enumerate_spmin, oracle_schedule, oracle_spmin, DEFAULT_ORACLE_BUDGET,
};
pub use standardize::{
    classify_midzz, is_standardized, match_pattern, reduce_patterns, standardize, MidzzClass,
    MidzzShape, PatternKind, ReductionEvent, ReductionKind, StandardizedSet,
};
pub use trace::{
    find_extrema, lower_bounds, make_process, sps, validate_interleaving, Extrema, Interleaving,
    LowerBounds, Process, ProcessSet, Space, SpaceMeasure, Verdict,
};
