use alloc::string::String;

/// Failure modes shared by every module of the engine.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Argument(String),
    /// A division by a jet with vanishing constant term or a domain violation
    /// (log/sqrt of a non-positive value, pole of a rational expression).
    #[error("singular point: {0}")]
    Singular(String),
    #[error("operation not available in exact-rational mode: {0}")]
    Mode(String),
    #[error("derivative of order {requested} exceeds jet order {order}")]
    OrderExceeded { requested: usize, order: usize },
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier `{name}` at offset {offset}")]
    UnknownIdentifier { name: String, offset: usize },
    /// Degenerate input for a geometric construction (F_pp = 0, degenerate conic, ...).
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("conic branch unavailable: {0}")]
    Branch(String),
    #[error("internal consistency failure: {0}")]
    Consistency(String),
    #[error("invalid pushdown: {0}")]
    InvalidPushdown(String),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;

pub(crate) fn singular(what: &str) -> Error {
    Error::Singular(what.into())
}
