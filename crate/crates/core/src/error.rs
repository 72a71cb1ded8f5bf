use thiserror::Error;

/// Errors raised by the numerical routines and the system-file parser.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the routine.
    #[error("domain error: {0}")]
    Domain(String),

    /// A stated precondition on the inputs does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A requested order exceeds what the truncated inputs can supply.
    #[error("truncation error: {0}")]
    Truncation(String),

    /// Inconsistent lengths between cooperating objects.
    #[error("length mismatch: {0}")]
    Length(String),

    /// Malformed input text.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// Well-formed input that violates a structural invariant.
    #[error("validation error: {0}")]
    Validation(String),

    /// Invalid option values (empty grids, bad ranges, ...).
    #[error("argument error: {0}")]
    Argument(String),

    /// A Padé denominator vanishes on the integration ray.
    #[error("singular approximant: {0}")]
    SingularApproximant(String),

    /// A requested feature (contour, branch) is absent from the data.
    #[error("not found: {0}")]
    NotFound(String),
}

pub type Result<T> = std::result::Result<T, Error>;
