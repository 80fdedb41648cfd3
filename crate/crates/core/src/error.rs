use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("invalid world: {0}")]
    InvalidWorld(String),

    #[error("path enumeration exceeded the cap of {cap} paths")]
    PathCapExceeded { cap: usize },

    /// An instance is too large for an exact/brute-force routine.
    #[error("size guard: {0}")]
    SizeGuard(String),

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    /// A selector (or caller) broke its contract; the search fails fast
    /// rather than repairing the decision silently.
    #[error("contract violation: {0}")]
    ContractViolation(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("no feasible path exists in this world")]
    NoFeasiblePath,

    /// Mutually inconsistent inputs (e.g. a trace that disagrees with the
    /// world it was supposedly recorded in, or an empty version space).
    #[error("inconsistent input: {0}")]
    Inconsistent(String),

    #[error("realizability violated: {0}")]
    Realizability(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
