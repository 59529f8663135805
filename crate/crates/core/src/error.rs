use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid number {0:?}")]
    Number(String),

    #[error("schema error at {locus}: {message}")]
    Schema { locus: String, message: String },

    #[error("duplicate key at {locus}: {key}")]
    DuplicateKey { locus: String, key: String },

    #[error("wrong arity at {locus}: expected {expected} coordinates, found {found}")]
    Arity {
        locus: String,
        expected: usize,
        found: usize,
    },

    #[error("model is not valid: {0}")]
    InvalidModel(String),

    #[error("{0}")]
    Precondition(String),

    #[error("instance has {free} free groups, enumeration cap is {cap}")]
    EnumerationCap { free: usize, cap: usize },

    #[error("instance is not submodular: pair ({0}, {1}) has negative weight")]
    NotSubmodular(usize, usize),

    #[error("instance is too large for enumeration and cannot be made submodular; enable annealing")]
    Unsolvable,

    #[error("coarsening side search exceeded the cap of {cap}")]
    CoarseningCap { cap: i64 },

    #[error("missing table entry: {0}")]
    MissingEntry(String),

    #[error("domain mismatch: {0}")]
    DomainMismatch(String),

    #[error("internal error: {0}")]
    Internal(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
