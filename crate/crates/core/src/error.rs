use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("cannot parse scalar {input:?}: {reason}")]
    ScalarParse { input: String, reason: String },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix has {found} entries, expected {expected}")]
    BadShape { expected: usize, found: usize },

    #[error("not a projection ({reason}): {matrix}")]
    NotProjection { reason: &'static str, matrix: String },

    #[error("not a density operator ({reason}): {matrix}")]
    NotDensity { reason: &'static str, matrix: String },

    #[error("direction {0} is not a unit vector")]
    NotUnitVector(String),

    #[error("sign must be +1 or -1, got {0}")]
    BadSign(i32),

    #[error("projections {first} and {second} do not commute")]
    NonCommuting { first: usize, second: usize },

    #[error("invalid context: {0}")]
    InvalidContext(String),

    #[error("context family is not closed: {0}")]
    NotClosed(String),

    #[error("context {0:?} is not a member of the family")]
    UnknownContext(String),

    #[error("projection is not an element of the context's lattice")]
    NotInLattice,

    #[error("invalid section: {0}")]
    InvalidSection(String),

    #[error("eigenvalues must be pairwise distinct")]
    RepeatedEigenvalue,

    #[error("{what} exceeds bound {bound} (needs {needed})")]
    BoundExceeded {
        what: &'static str,
        bound: usize,
        needed: usize,
    },

    #[error("the empty event has no dimension")]
    EmptyEvent,

    #[error("event is not a condition of the model")]
    NotACondition,

    #[error("scenario error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("scenario invariant violated: {0}")]
    Invariant(String),

    #[error("{0}")]
    Usage(String),
}

pub type Result<T> = std::result::Result<T, Error>;
