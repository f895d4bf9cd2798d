use thiserror::Error;

/// Errors produced by targets, transforms, samplers and the batch front end.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameter `{name}`: {message}")]
    InvalidParameter { name: String, message: String },

    #[error("row {row}: {message}")]
    Parse { row: usize, message: String },

    #[error("predictor column `{column}` has zero variance")]
    DegenerateColumn { column: String },

    #[error("Laplace approximation invalid here: Hessian at the mode has eigenvalue {eigenvalue:e}")]
    LaplaceInvalid { eigenvalue: f64 },

    #[error("mode search did not converge after {iterations} iterations (|grad| = {grad_norm:e}, last iterate {last:?})")]
    NotConverged {
        iterations: usize,
        grad_norm: f64,
        last: Vec<f64>,
    },

    #[error("non-finite regeneration rate at time {time}, state {state:?}")]
    NonFiniteRate { time: f64, state: Vec<f64> },

    #[error("partial rate nonnegative on sample; C̃=0 suffices")]
    NonNegativePartialRate,

    #[error("need at least {needed} completed tours, run has {got}")]
    NotEnoughTours { needed: usize, got: usize },

    #[error("no samples")]
    EmptySamples,

    #[error("partial rate has no negative region in [{lo}, {hi}]")]
    NoNegativeRegion { lo: f64, hi: f64 },

    #[error("proposal scale tuning failed: last scale {scale:e} gave acceptance {acceptance:.3}")]
    TuningFailed { scale: f64, acceptance: f64 },

    #[error("config key `{key}`{}: {message}", line.map(|l| format!(" (line {l})")).unwrap_or_default())]
    Config {
        key: String,
        line: Option<usize>,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(name: &str, message: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name: name.to_string(),
        message: message.into(),
    }
}

pub(crate) fn check_dim(expected: usize, x: &[f64]) -> Result<()> {
    if x.len() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            got: x.len(),
        });
    }
    Ok(())
}
