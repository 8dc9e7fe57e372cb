use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("channel is not degraded (residual {residual:.3e})")]
    NotDegraded { residual: f64 },

    #[error("linear program failed: {0}")]
    LinearProgram(String),

    #[error("budget exceeded: {what} needs {required} but the budget is {budget}")]
    BudgetExceeded {
        what: &'static str,
        required: f64,
        budget: f64,
    },

    #[error("rejection sampler gave up after {attempts} attempts (last squared norm {last_norm_sq:.4}, limit {limit:.4})")]
    RejectionCap {
        attempts: usize,
        last_norm_sq: f64,
        limit: f64,
    },

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
