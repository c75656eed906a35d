//! Error type shared by every module of the library.

use std::path::PathBuf;
use thiserror::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised by dataset handling, kernel construction, the dual solver
/// and the evaluation harness.
#[derive(Debug, Error)]
pub enum Error {
    /// Dimensions of related inputs do not line up.
    #[error("shape mismatch in {context}: expected {expected}, got {got}")]
    ShapeMismatch {
        context: String,
        expected: String,
        got: String,
    },

    /// An input contained NaN or an infinity.
    #[error("non-finite value in {context}")]
    NonFiniteInput { context: String },

    /// A parameter violated its domain constraint.
    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: String,
        value: String,
        reason: String,
    },

    /// Labels unusable for a binary subproblem (single class, missing class).
    #[error("degenerate labels: {0}")]
    DegenerateLabels(String),

    /// The dual system could not be solved even after the jitter retry.
    #[error("solver failure: {0}")]
    SolverFailure(String),

    /// Stratified splitting is infeasible for the given labels.
    #[error("stratification error: {0}")]
    Stratification(String),

    /// Downsampling allocation is infeasible for the given target.
    #[error("allocation error: {0}")]
    Allocation(String),

    /// Dataset directory or file contents failed validation.
    #[error("dataset validation: {0}")]
    Validation(String),

    /// I/O failure, with the offending path.
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Parse failure, with file and 1-based line number.
    #[error("parse error in {file}, line {line}: {message}")]
    Parse {
        file: String,
        line: usize,
        message: String,
    },

    /// Serialization or deserialization failure.
    #[error("serialization: {0}")]
    Serialization(String),
}

impl Error {
    pub(crate) fn shape(
        context: impl Into<String>,
        expected: impl Into<String>,
        got: impl Into<String>,
    ) -> Self {
        Error::ShapeMismatch {
            context: context.into(),
            expected: expected.into(),
            got: got.into(),
        }
    }

    pub(crate) fn non_finite(context: impl Into<String>) -> Self {
        Error::NonFiniteInput {
            context: context.into(),
        }
    }

    pub(crate) fn param(
        name: impl Into<String>,
        value: impl std::fmt::Display,
        reason: impl Into<String>,
    ) -> Self {
        Error::InvalidParameter {
            name: name.into(),
            value: value.to_string(),
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
