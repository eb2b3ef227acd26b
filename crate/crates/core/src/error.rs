//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid generator or protocol parameter combination.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Marked-set enumeration exceeded the configured state cap. The
    /// simulation requires the complete set for exact amplitudes, so the run
    /// aborts instead of truncating silently.
    #[error("marked-set cap exceeded: more than {cap} states (saw {seen} before aborting)")]
    MarkedSetCap { cap: usize, seen: usize },

    /// A resource budget (memory, qubits) would be exceeded.
    #[error("resource budget exceeded: {0}")]
    ResourceBudget(String),

    /// Ratio with a zero denominator (e.g. RVTR with incumbent value 0).
    #[error("undefined ratio: {0}")]
    UndefinedRatio(String),

    /// No valid nesting depth exists (n < 2).
    #[error("no valid depth for n = {n}")]
    NoValidDepth { n: usize },

    /// Register layout does not fit the statevector qubit cap.
    #[error("register layout needs {needed} qubits, cap is {cap}")]
    RegisterOverflow { needed: usize, cap: usize },

    /// A globally marked state has no inner-ensemble prefix. Prefix closure
    /// guarantees this never happens for consistent inputs, so hitting it
    /// indicates a marked-set extraction bug.
    #[error("depth-{depth} prefix {prefix:#x} missing from inner ensemble")]
    PrefixMissing { prefix: u64, depth: usize },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("instance serialization: {0}")]
    Json(#[from] serde_json::Error),
}
