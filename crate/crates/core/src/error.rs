use thiserror::Error;

/// Errors produced by geometry construction, the solver and post-processing.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("constraint violation: {0}")]
    Constraint(String),

    #[error("thin-wire kernel validity: {0}")]
    KernelValidity(String),

    #[error("geometry collision: {0}")]
    Collision(String),

    #[error("invalid wire model: {0}")]
    InvalidModel(String),

    #[error("singular system (condition estimate {condition:.3e})")]
    Singular { condition: f64 },

    #[error("solve failed at {frequency_hz} Hz: {source}")]
    AtFrequency {
        frequency_hz: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("degenerate pattern: {0}")]
    DegeneratePattern(String),

    #[error("solver inconsistency: {0}")]
    Inconsistent(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
