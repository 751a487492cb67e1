use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is singular")]
    Singular,

    #[error("rank deficient: expected rank {expected}, found {found}")]
    RankDeficient { expected: usize, found: usize },

    #[error("invalid block permutation: {0}")]
    InvalidPermutation(String),

    #[error("invalid subset: {0}")]
    InvalidSubset(String),

    /// A coordinate of `N^{-1} w` vanished, so the half-open rule is undefined.
    #[error("direction is not generic for {0}")]
    Genericity(String),

    #[error("no generic direction found after {0} attempts")]
    GenericityExhausted(usize),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("rendering requires a two-dimensional drawing: {0}")]
    NotTwoDimensional(String),
}

pub type Result<T> = std::result::Result<T, Error>;
