use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate domain: {0}")]
    DegenerateDomain(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("invalid two-ball configuration: {0}")]
    InvalidConfig(String),

    #[error("parameter out of range: {0}")]
    OutOfRange(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("{solver} did not converge in {iterations} iterations (residual {residual:.3e})")]
    IterationLimit {
        solver: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("matrix is not positive definite (pivot {pivot} = {value:.3e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("decomposition failed: {0}")]
    Decomposition(String),

    #[error("discretization bias: {0}")]
    DiscretizationBias(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("config error in `{field}`: {message}")]
    Config { field: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }
}
