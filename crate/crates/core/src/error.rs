use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("unknown operation `{0}`")]
    UnknownOperation(String),
    #[error("operation `{op}` has arity {expected}, got {got} arguments")]
    ArityMismatch {
        op: String,
        expected: usize,
        got: usize,
    },
    #[error("element {elem} out of range for universe of size {size}")]
    ElementOutOfRange { elem: usize, size: usize },
    #[error("invalid algebra: {0}")]
    InvalidAlgebra(String),
    #[error("signature mismatch: {0}")]
    SignatureMismatch(String),
    #[error("{what}: {requested} exceeds cap {cap}")]
    CapExceeded {
        what: &'static str,
        requested: u128,
        cap: u128,
    },
    #[error("relation sizes differ: {left} vs {right}")]
    SizeMismatch { left: usize, right: usize },
    #[error("value for `{var}` is not a {class}: {reason}")]
    ClassViolation {
        var: String,
        class: String,
        reason: String,
    },
    #[error("parse error at {line}:{column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unknown builtin identity `{0}`")]
    UnknownBuiltin(String),
    #[error("bad parameters: {0}")]
    BadParams(String),
    #[error("clone generation stopped at cap {cap}; result is incomplete")]
    IncompleteClone { cap: usize },
    #[error("operator `{0}` is not allowed here")]
    ForbiddenOperator(String),
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("{0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        }
    }
}
