use alloc::string::String;

/// Errors raised by constructors, engines and analyses.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("resource limit: {0}")]
    ResourceLimit(String),
    #[error("instruction {index} ({kind}) is not unitary")]
    NonUnitary { index: usize, kind: String },
    #[error("instruction {index} ({kind}) is not Clifford")]
    NonClifford { index: usize, kind: String },
    #[error("role conflict on qubit {qubit}: {detail}")]
    RoleConflict { qubit: usize, detail: String },
    #[error("invalid circuit: {0}")]
    InvalidCircuit(String),
    #[error("state has zero norm")]
    ZeroNorm,
    #[error(transparent)]
    Parse(#[from] ParseError),
}

pub type Result<T> = core::result::Result<T, Error>;

/// A text-format error with its 1-based line number (0 when not tied to a line).
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

impl ParseError {
    pub fn new(line: usize, message: impl Into<String>) -> Self {
        ParseError { line, message: message.into() }
    }
}
