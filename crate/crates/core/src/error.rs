use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("fractional order s = {0} outside the admissible range {1}")]
    InvalidOrder(f64, &'static str),
    #[error("domain has no inside node")]
    EmptyDomain,
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("empty set where a nonempty one is required: {0}")]
    EmptySet(&'static str),
    #[error("no complement node in the witness disk of cell ({0}, {1}); radius exceeds the true inradius")]
    NoWitness(usize, usize),
    #[error("{what} did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("missing constant `{0}`")]
    MissingConstant(&'static str),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
