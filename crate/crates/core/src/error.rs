use thiserror::Error;

/// Errors raised while building or transforming problems.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CspError {
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("duplicate variable `{0}`")]
    DuplicateVariable(String),
    #[error("duplicate value `{value}` in domain of `{var}`")]
    DuplicateValue { var: String, value: String },
    #[error("value `{value}` is not in the domain of `{var}`")]
    ValueNotInDomain { var: String, value: String },
    #[error("scope error: {0}")]
    Scope(String),
    #[error("tuple of length {got} does not match constraint arity {arity}")]
    Arity { arity: usize, got: usize },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("constraint {0} is intensional and must be materialized first")]
    MaterializationRequired(usize),
    #[error("{0} is too large for a dense table")]
    TooLarge(String),
    #[error("parameter error: {0}")]
    Parameter(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("advisor has no decision for path {0}")]
    Coverage(String),
    #[error("{0} is unavailable")]
    Unavailable(String),
    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T, E = CspError> = std::result::Result<T, E>;

impl From<std::io::Error> for CspError {
    fn from(e: std::io::Error) -> Self {
        CspError::Io(e.to_string())
    }
}
