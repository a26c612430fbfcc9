//! Crate-wide error type.

use thiserror::Error;

/// Errors shared by the whole crate.
#[derive(Debug, Error)]
pub enum Error {
    /// A document failed schema validation; `field` names the offender.
    #[error("schema error at {field}: {message}")]
    Schema { field: String, message: String },

    /// A numeric string could not be parsed exactly.
    #[error("cannot parse {input:?}: {message}")]
    Parse { input: String, message: String },

    /// An operation precondition was violated.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Walk enumeration would exceed the configured budget.
    #[error("enumeration of {count} walks exceeds budget {budget}; use walk_count instead")]
    Budget { count: String, budget: u64 },

    /// A projection index fell outside a finite walk.
    #[error("index {index} out of range for walk of {len} coordinates")]
    IndexOutOfRange { index: usize, len: usize },

    /// Star concatenation requires matching endpoints.
    #[error("star concatenation endpoint mismatch: {left} != {right}")]
    EndpointMismatch { left: String, right: String },

    /// Two orbits or walks belong to different point sets.
    #[error("operands belong to different point sets")]
    SpaceMismatch,

    /// The requested quantity needs exact rational distances, which the
    /// metric does not provide for these points.
    #[error("exact rational distance unavailable: {0}")]
    InexactDistance(String),

    /// A return-based construction found no witness for this point.
    #[error("no return witness for point {0}")]
    NoReturn(String),

    /// Independently computed conditions that must agree did not.
    #[error("internal inconsistency: {0}")]
    Inconsistency(String),

    /// File or stream IO failed.
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    /// JSON (de)serialization failed.
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn schema(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Schema {
            field: field.into(),
            message: message.into(),
        }
    }

    pub fn parse(input: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            input: input.into(),
            message: message.into(),
        }
    }

    pub fn precondition(message: impl Into<String>) -> Self {
        Error::Precondition(message.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
