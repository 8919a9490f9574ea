use thiserror::Error;

/// Library-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("self-loop rejected at line {line}: node {node}")]
    SelfLoop { line: usize, node: usize },

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("space accounting error: balance would go negative ({current} + {delta})")]
    Accounting { current: i64, delta: i64 },

    #[error("size guard: {0}")]
    SizeGuard(String),

    #[error("oracle contract violation: {0}")]
    OracleContract(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("internal invariant failure: {0}")]
    Internal(String),

    #[error("iteration budget exhausted: {0}")]
    BudgetExhausted(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
