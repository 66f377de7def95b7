use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("line index {index} out of range for a {lines}-line circuit")]
    LineOutOfRange { index: usize, lines: usize },

    #[error("gate arguments are not pairwise distinct: {0:?}")]
    RepeatedArgument([u8; 3]),

    #[error("{kind} needs {needed} lines but the circuit has {lines}")]
    ArityTooLarge {
        kind: &'static str,
        needed: usize,
        lines: usize,
    },

    #[error("state width {got} does not match expected width {expected}")]
    WidthMismatch { expected: usize, got: usize },

    #[error("unsupported line count {0} (must be between 1 and 64)")]
    UnsupportedLineCount(usize),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("unknown function `{name}`; built-ins are {builtins}")]
    UnknownFunction { name: String, builtins: String },

    #[error("invalid truth table: {0}")]
    TruthTable(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("unsatisfiable restriction: {0}")]
    UnsatisfiableRestriction(String),

    #[error("invalid coupling map: {0}")]
    Coupling(String),

    #[error("resource guard: {0}")]
    ResourceGuard(String),

    #[error("invalid weights: {0}")]
    Weights(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}
