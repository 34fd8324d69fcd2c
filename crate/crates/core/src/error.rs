use thiserror::Error;

/// Errors shared by the trace model, the solvers and the schedule builders.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("empty trace for process {0}")]
    EmptyTrace(String),

    #[error("negative space value {value} at index {index} of process {id}")]
    NegativeValue { id: String, index: usize, value: i64 },

    #[error("duplicate process id {0}")]
    DuplicateId(String),

    #[error("process set must contain at least one process")]
    EmptyProcessSet,

    #[error("empty interleaving")]
    EmptyInterleaving,

    #[error("interleaving step {step} has arity {got}, expected {want}")]
    ArityMismatch { step: usize, got: usize, want: usize },

    #[error("arithmetic overflow while combining space values")]
    Overflow,

    #[error("not standardized: {0}")]
    NotStandardized(String),

    #[error("state space too large: {states} position states exceed budget {budget}")]
    StateSpaceTooLarge { states: u128, budget: usize },

    #[error("enumeration limit of {0} interleavings exceeded")]
    EnumerationLimit(u64),

    #[error("constrained search too large: more than {budget} states explored")]
    ConstrainedSearchTooLarge { budget: usize },

    #[error("no permitted schedule")]
    NoPermittedSchedule,

    #[error("unknown time point {id}[{index}]")]
    UnknownTimePoint { id: String, index: usize },

    #[error("too many restriction atoms ({0}); at most 32 distinct atoms supported")]
    TooManyAtoms(usize),

    #[error("reconstruction invariant violated: {0}")]
    ReconstructionInvariant(String),

    #[error("{0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Checked sum used everywhere space values are combined. Space values are
/// plain integers, but sums over many processes may not fit and must be
/// reported rather than wrapped.
pub(crate) fn checked_add(a: u64, b: u64) -> Result<u64> {
    a.checked_add(b).ok_or(Error::Overflow)
}

pub(crate) fn checked_sum<I: IntoIterator<Item = u64>>(values: I) -> Result<u64> {
    let mut acc: u64 = 0;
    for v in values {
        acc = checked_add(acc, v)?;
    }
    Ok(acc)
}
