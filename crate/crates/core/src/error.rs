use thiserror::Error;

/// Errors reported by every fallible operation in the crate.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("elements belong to incompatible field towers: {0}")]
    MixedContext(String),
    #[error("division by an element that is zero at the working precision")]
    ImpreciseZero,
    #[error("division by zero")]
    DivisionByZero,
    #[error("outside the domain of convergence: {0}")]
    Domain(String),
    #[error("cannot evaluate at t = theta: {0}")]
    NotEvaluable(String),
    #[error("insufficient precision: {0}")]
    Precision(String),
    #[error("resource bound exceeded: {0}")]
    Resource(String),
    #[error("class mismatch: {0}")]
    ClassMismatch(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("unsupported operation: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
