use thiserror::Error;

#[derive(Debug, Error)]
pub enum ItmError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("point {0} is outside [0, 1]")]
    OutOfDomain(String),
    #[error("parameters ({alpha}, {beta}) are not in U")]
    InvalidParams { alpha: String, beta: String },
    #[error("point is not in the interior of U: ({alpha}, {beta})")]
    NotInInterior { alpha: String, beta: String },
    #[error("division by zero: {0}")]
    DivisionByZero(String),
    #[error("k-sequence too short: need a word of length {needed}, reached {achieved}")]
    PrefixExhausted { needed: usize, achieved: usize },
    #[error("word too short: length {len} < {needed}")]
    WordTooShort { len: usize, needed: usize },
    #[error("component cap of {cap} exceeded at step {step}")]
    ComponentCap { cap: usize, step: usize },
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("return time exceeded {0} iterations")]
    ReturnTimeCap(usize),
    #[error("inconsistent cover step: alpha = {alpha} is not in the cell of k = {k}")]
    InconsistentCell { k: u64, alpha: String },
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, ItmError>;
