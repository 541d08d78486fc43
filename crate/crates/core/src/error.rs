use thiserror::Error;

/// Errors raised across the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("singular metric at node {node}: {detail}")]
    SingularMetric { node: usize, detail: String },
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("grid too small: {0}")]
    GridTooSmall(String),
    #[error("non-positive profile coefficient {field} at node {node}")]
    NonPositive { field: &'static str, node: usize },
    #[error("decay unmeasurable: {0}")]
    Unmeasurable(String),
    #[error("numerically inconclusive: {0}")]
    Inconclusive(String),
    #[error("mode cutoff too low: {0}")]
    ModeCutoff(String),
    #[error("undefined: {0}")]
    Undefined(String),
    #[error("exceptional weight {0}")]
    ExceptionalWeight(f64),
    #[error("complementarity failure: {0}")]
    Complementarity(String),
    #[error("orientation clash: {0}")]
    Orientation(String),
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
    #[error("divergence: {0}")]
    Divergence(String),
    #[error("positivity lost: {0}")]
    Positivity(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("format: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Format(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Format(e.to_string())
    }
}
