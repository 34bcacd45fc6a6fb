use thiserror::Error;

use crate::name::{Index, Key, RelName, Sort, Symbol, Token};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown sort `{0}`")]
    UnknownSort(Sort),
    #[error("unknown type `{0}`")]
    UnknownType(String),
    #[error("unknown relation type `{0}`")]
    UnknownRelation(RelName),
    #[error("unknown operator symbol `{0}`")]
    UnknownSymbol(Symbol),
    #[error("unknown token `{0}`")]
    UnknownToken(Token),
    #[error("unknown index `{0}`")]
    UnknownIndex(Index),
    #[error("unknown {kind} `{name}`")]
    UnknownName { kind: &'static str, name: String },
    #[error("arity mismatch: expected {{{expected}}}, found {{{found}}}")]
    ArityMismatch { expected: String, found: String },
    #[error("capacity exceeded: {what} would exceed the cap of {limit}")]
    CapacityExceeded { what: &'static str, limit: usize },
    #[error("sort clash at `{index}`: `{left}` vs `{right}`")]
    SortClash { index: String, left: Sort, right: Sort },
    #[error("type mismatch: {0}")]
    TypeMismatch(String),
    #[error("sort error: {0}")]
    SortError(String),
    #[error("term depth exceeds the cap of {0}")]
    DepthExceeded(usize),
    #[error("invalid morphism: {0}")]
    InvalidMorphism(String),
    #[error("composition mismatch: {0}")]
    CompositionMismatch(String),
    #[error("invalid {kind}: {message}")]
    Invalid { kind: &'static str, message: String },
    #[error("syntax error at {line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("witness algebra does not satisfy its own presentation: {0}")]
    UnsoundWitness(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("channel does not cover the distributed system: {0}")]
    NotCovering(String),
    #[error("logic is not sound: {} unsatisfied constraint(s)", .0.len())]
    UnsoundLogic(Vec<String>),
    #[error("database morphism condition violated at formula `{formula}`, key `{key}`")]
    ConditionViolated { formula: String, key: Key },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("{path}: {source}")]
    InFile { path: String, source: Box<Error> },
}

impl Error {
    pub(crate) fn invalid(kind: &'static str, message: impl Into<String>) -> Self {
        Error::Invalid {
            kind,
            message: message.into(),
        }
    }
}
