use thiserror::Error;

use crate::dyadic::DyadicError;

#[derive(Debug, Error)]
pub enum Error {
    #[error("arithmetic: {0}")]
    Dyadic(#[from] DyadicError),
    #[error("arithmetic overflow at depth {depth}: {source}")]
    Overflow { depth: usize, source: DyadicError },
    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),
    #[error("integrity check failed: {0}")]
    Integrity(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("corrupt file at byte {offset}: {msg}")]
    Format { offset: u64, msg: String },
    #[error("resource limit: {0}")]
    Resource(String),
    #[error("no word found within depth budget {depth}")]
    NotFoundWithinBudget { depth: usize },
    #[error("syntax error at line {line}, column {col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;
