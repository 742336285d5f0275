//! Error type shared across the library.

use thiserror::Error;

/// Errors produced by the exact pipeline.
///
/// `InvalidInput` and `Precondition` map to CLI exit code 2, `Numeric` to
/// exit code 3; everything else is an internal invariant failure surfaced
/// verbatim.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed or incomplete user input (bad JSON, missing moments,
    /// a degenerate affine map, an atom off its curve).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Structurally valid input that violates a mathematical precondition
    /// of the requested procedure.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A square root of a rational that is not a perfect square was
    /// requested in strict-rational mode.
    #[error("irrational scaling required: sqrt({0}) is not rational")]
    IrrationalScaling(String),

    /// Exact arithmetic would need to mix two distinct quadratic
    /// extensions, which this library does not model.
    #[error("incompatible radicands: cannot combine sqrt({0}) with sqrt({1})")]
    IncompatibleRadicands(String, String),

    /// The canonicalization case tree terminated on a relation that does
    /// not match the expected canonical form.
    #[error("canonicalization mismatch: reached relation {achieved}, expected {expected}")]
    CanonicalMismatch { achieved: String, expected: String },

    /// The floating-point extraction step failed to meet its tolerance.
    #[error("numeric failure: {0}")]
    Numeric(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code for the CLI: 2 for input/precondition problems,
    /// 3 for numeric failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Numeric(_) => 3,
            _ => 2,
        }
    }
}
