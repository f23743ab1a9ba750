use thiserror::Error;

/// Errors raised across the toolkit.
///
/// Link and row indices carried by variants are 1-based, matching the file
/// formats and command-line interface.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TomoError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid topology: {0}")]
    InvalidTopology(String),

    #[error("invalid path: {0}")]
    InvalidPath(String),

    #[error("insufficient paths: found {found}, need at least 2")]
    InsufficientPaths { found: usize },

    #[error("cannot select {requested} paths from {available} candidates")]
    SelectionTooLarge { requested: usize, available: usize },

    #[error("duplicate routing-matrix rows {first} and {second}")]
    DuplicateRows { first: usize, second: usize },

    #[error("link e{link} covered by no path / cancelled by reference")]
    ZeroColumn { link: usize },

    #[error("matrix needs at least {required} columns, has {found}")]
    TooFewColumns { required: usize, found: usize },

    #[error("reference row {reference} out of range 1..={rows}")]
    ReferenceOutOfRange { reference: usize, rows: usize },

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("enumeration guard exceeded: C({n},{k}) > {limit}")]
    EnumerationTooLarge { n: usize, k: usize, limit: u128 },

    #[error("path sets are not nested: set {index} does not extend its predecessor")]
    NotNested { index: usize },
}

pub type Result<T> = std::result::Result<T, TomoError>;
