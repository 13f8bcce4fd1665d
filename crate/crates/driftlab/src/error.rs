use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Unified error type for the laboratory.
///
/// Numerical routines distinguish between *rejected inputs* (`Parameter`,
/// `Config`, `Resolution`, `Singularity`), *iteration failures* that carry the
/// best known state (`Iteration`, `Solver`), and arithmetic trouble
/// (`Overflow`).
#[derive(Debug, Error)]
pub enum Error {
    #[error("parameter error: {0}")]
    Parameter(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("evaluation at a drift singularity without regularization at {point:?}")]
    Singularity { point: Vec<f64> },

    #[error("mollifier width {epsilon} below grid resolution (need epsilon >= 2h = {min})")]
    Resolution { epsilon: f64, min: f64 },

    #[error(
        "iteration did not converge after {iterations} iterations (last estimate {last_estimate}, residual {residual})"
    )]
    Iteration {
        iterations: usize,
        last_estimate: f64,
        residual: f64,
    },

    #[error("linear solver stagnated: final residual {residual} after {iterations} iterations")]
    Solver {
        iterations: usize,
        residual: f64,
        history: Vec<f64>,
    },

    #[error("overflow evaluating {context} (max argument {max_arg})")]
    Overflow { context: &'static str, max_arg: f64 },

    #[error("validation error in field `{field}`: {message}")]
    Validation { field: String, message: String },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn parameter(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn validation(field: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            message: msg.into(),
        }
    }
}
