use thiserror::Error;

/// Errors raised across the algebraic and numerical pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Operands live in incompatible rings or the configuration is malformed.
    #[error("configuration error: {0}")]
    Config(String),

    /// A product would push the valuation floor below the ring's bound.
    #[error("valuation floor {floor} is below the configured bound {bound}")]
    Valuation { floor: i32, bound: i32 },

    /// The lowest-degree part of a series is not a single invertible term.
    #[error("series is not invertible: {0}")]
    NotInvertible(String),

    /// A substitution hit a vanishing denominator (collided fixed points).
    #[error("specialization error: {0}")]
    Specialization(String),

    /// Input outside the accepted domain (letters, indices, empty series).
    #[error("invalid input: {0}")]
    Input(String),

    /// A parabolic or otherwise degenerate group element.
    #[error("degenerate element: {0}")]
    Degenerate(String),

    /// The evaluation point is too close to a pole of a differential.
    #[error("point {0} is within tolerance of a pole")]
    NearPole(String),

    /// Quadrature did not stabilise under node doubling.
    #[error("quadrature did not converge: {0}")]
    Resolution(String),

    /// A numeric group violates the small-multiplier policy or circle layout.
    #[error("out of policy: {0}")]
    Policy(String),

    /// A structural check failed in a way that signals a bug in the pipeline.
    #[error("pipeline inconsistency: {0}")]
    Pipeline(String),

    /// Malformed text input.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// Artifact written by an incompatible version.
    #[error("version mismatch: expected {expected}, found {found}")]
    Version { expected: String, found: String },

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
