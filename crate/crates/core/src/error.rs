use thiserror::Error;

use crate::formula::ParseError;
use crate::model::{Point, ValidationReport};

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed model document: {0}")]
    ModelFormat(String),

    #[error("model failed validation with {} violation(s)", .0.violations.len())]
    InvalidModel(ValidationReport),

    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error("unknown agent `{0}`")]
    UnknownAgent(String),

    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("value `{value}` is not in the domain of `{variable}`")]
    UnknownValue { variable: String, value: String },

    #[error("unknown group `{0}`")]
    UnknownGroup(String),

    #[error("unknown time-stamp function `{0}`")]
    UnknownStamp(String),

    #[error("unknown run `{0}`")]
    UnknownRun(String),

    #[error("unknown point {0}")]
    UnknownPoint(Point),

    #[error("malformed point `{0}` (expected `run,time`)")]
    BadPoint(String),

    #[error("`{0}` names both an agent and a group")]
    AmbiguousName(String),

    #[error("empty agent set in a group operator")]
    EmptyGroup,

    #[error("expected a common-belief node (C, C[t:..], Ca), found `{0}`")]
    NotCommonNode(String),

    #[error("nesting depth must be positive")]
    ZeroDepth,

    #[error("invalid generator bounds: {0}")]
    InvalidBounds(String),
}
