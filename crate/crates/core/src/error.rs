use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("index component {component} out of range for dimension {n}")]
    IndexOutOfRange { component: usize, n: usize },

    #[error("index tuple has length {got}, expected order {expected}")]
    IndexLength { got: usize, expected: usize },

    #[error("shape mismatch: ({n1}, {d1}) vs ({n2}, {d2})")]
    ShapeMismatch {
        n1: usize,
        d1: usize,
        n2: usize,
        d2: usize,
    },

    #[error("vector has length {got}, expected dimension {expected}")]
    DimensionMismatch { got: usize, expected: usize },

    #[error("invalid tensor shape: n = {n}, d = {d}")]
    InvalidShape { n: usize, d: usize },

    #[error("split {split} out of range 1..={max}")]
    SplitOutOfRange { split: usize, max: usize },

    #[error("degenerate simplex: {0}")]
    DegenerateSimplex(String),

    #[error("size cap exceeded: {what} needs {needed} items, limit is {limit}")]
    SizeCap {
        what: &'static str,
        needed: u128,
        limit: u128,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
