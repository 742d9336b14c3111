use thiserror::Error;

use crate::netcore::Comparator;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("comparator connects register {0} to itself")]
    DegenerateComparator(usize),

    #[error("register {reg} is used by more than one comparator in the same stage")]
    RegisterReused { reg: usize },

    #[error("register {reg} out of range for a {n_registers}-register network")]
    RegisterOutOfRange { reg: usize, n_registers: usize },

    #[error("declared period {period} is invalid for a network of depth {depth}")]
    InvalidPeriod { period: usize, depth: usize },

    #[error("declared period {period} violated: stage {stage} differs from stage {}", stage + period)]
    PeriodViolated { period: usize, stage: usize },

    #[error("register {0} is not used by any stage")]
    RegisterUnused(usize),

    #[error("stage register conflict at stage {stage}")]
    StageConflict { stage: usize },

    #[error("register count mismatch: {left} vs {right}")]
    RegisterCountMismatch { left: usize, right: usize },

    #[error("value vector has length {got}, network has {expected} registers")]
    LengthMismatch { expected: usize, got: usize },

    #[error("dropped registers are still referenced by {0:?}")]
    DroppedRegisterInUse(Vec<Comparator>),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("input is not sorted: {0}")]
    Unsorted(String),

    #[error("column {column} is not sorted")]
    UnsortedColumn { column: usize },

    #[error("sequence is not balanced")]
    NotBalanced,

    #[error("sequence is balanced; bounds are only defined for unbalanced sequences")]
    Balanced,

    #[error("sequence is not 2-flat")]
    NotTwoFlat,

    #[error("exhaustive mode refused: {n_registers} registers exceeds the limit of {limit}; use randomized mode")]
    ExhaustiveTooLarge { n_registers: usize, limit: usize },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("thread pool: {0}")]
    ThreadPool(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
