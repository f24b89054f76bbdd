//! Domain types, the topology document format and structural validation.

mod config;
mod time;
mod topology;
mod validate;

pub use config::*;
pub(crate) use config::json_error;
pub use time::{Duration, WordTime};
pub use topology::*;
pub use validate::{validate_topology, Diagnostic, Severity, ValidationResult};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("{message} (line {line}, column {column})")]
    UnknownField { line: usize, column: usize, message: String },
    #[error("{message} (line {line}, column {column})")]
    MissingField { line: usize, column: usize, message: String },
    #[error("schema error at line {line}, column {column}: {message}")]
    Schema { line: usize, column: usize, message: String },
    #[error("duplicate id `{0}`")]
    DuplicateId(String),
    #[error("unknown id `{0}`")]
    UnknownId(String),
    #[error("invalid parameter: {0}")]
    Invalid(String),
}
