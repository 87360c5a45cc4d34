use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("budget exhausted: found {found} of {requested} nonzero coordinates after scanning {scanned} indices")]
    BudgetExhausted {
        requested: u64,
        found: u64,
        scanned: u64,
    },

    #[error("incompatible sequences: {0}")]
    IncompatibleKinds(String),

    #[error("no symbolic membership rule for {0}")]
    UnsupportedSpace(String),

    #[error("invalid index set: {0}")]
    InvalidIndexSet(String),

    #[error("invalid map: {0}")]
    InvalidMap(String),

    #[error("invalid space: {0}")]
    InvalidSpace(String),

    #[error("family is not nested: {0}")]
    NotNested(String),

    #[error("degenerate mother vector: {0}")]
    DegenerateMother(String),

    #[error("mother vector is not in G: {0}")]
    NotInG(String),

    #[error("neither half escapes the family at the given budget")]
    InconclusiveSplit,

    #[error("inconclusive at budget: {0}")]
    Inconclusive(String),

    #[error("insufficient truncation: {0}")]
    InsufficientTruncation(String),

    #[error("empty catalog: {0}")]
    EmptyCatalog(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
