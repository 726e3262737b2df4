use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u32),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("prime mismatch: {0} vs {1}")]
    PrimeMismatch(u32, u32),
    #[error("{what} exceeds enumeration cap ({value} > {cap})")]
    CapExceeded { what: &'static str, value: u128, cap: u128 },
    #[error("phase {phase} is not valid for a stabilizer element (p = {p})")]
    InvalidPhase { phase: u32, p: u32 },
    #[error("index {index} out of range for {len} entries")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("invalid subset: {0}")]
    InvalidSubset(String),
    #[error("invalid tableau: {0}")]
    InvalidTableau(String),
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("state is not pure ({k} generators on {n} qudits)")]
    NotPure { k: usize, n: usize },
    #[error("internal consistency violation: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
