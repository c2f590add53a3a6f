use thiserror::Error;

use crate::word::TernaryWord;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("digit {0} is not in {{0,1,2}}")]
    InvalidDigit(u8),
    #[error("malformed ternary word {0:?}")]
    InvalidWord(String),
    #[error("invalid extension: {0}")]
    InvalidExtension(String),
    #[error("point index {0} out of range")]
    PointOutOfRange(usize),
    #[error("inconsistent pseudotree: {0}")]
    InconsistentTree(String),
    #[error("node {0} is not in the coding tree")]
    NodeAbsent(TernaryWord),
    #[error("node {0} is not a coding node")]
    NotCodingNode(TernaryWord),
    #[error("point set is not closed under meets (missing meet of points {0} and {1})")]
    NotMeetClosed(usize, usize),
    #[error("depth exhausted: {0}")]
    DepthExhausted(String),
    #[error("constraint at {x} cannot be satisfied within the budget")]
    ConstraintUnsatisfiable { x: TernaryWord },
    #[error("invalid amalgamation input: {0}")]
    InvalidAmalgamation(String),
    #[error("not a leveled subtree: {0}")]
    NotSubtree(String),
    #[error("nodes do not form a chain in the pseudotree")]
    NotAChain,
    #[error("nodes do not form an almost antichain")]
    NotAlmostAntichain,
    #[error("theta of {0} is unknown at this depth")]
    ThetaUnknown(TernaryWord),
    #[error("not diary shaped: {0}")]
    NotDiaryShaped(String),
    #[error("instance too large: {0}")]
    InstanceTooLarge(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("configuration error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
