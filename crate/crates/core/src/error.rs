use thiserror::Error;

pub type Result<T> = std::result::Result<T, FchError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FchError {
    #[error("value {value} outside the admissible interval {interval}")]
    Domain { value: f64, interval: &'static str },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("field mean {mean:e} is not zero (tolerance {tol:e})")]
    Mean { mean: f64, tol: f64 },

    #[error("integrand overflow at sample {index}")]
    Overflow { index: usize },

    #[error("Newton iteration did not converge in {iters} iterations (residual {residual:e})")]
    NewtonDivergence { iters: usize, residual: f64 },

    #[error("damping could not keep the Newton iterate inside |u| <= {bound}")]
    GuardViolation { bound: f64 },

    #[error("step rejected at the minimum step size {dt_min:e} (t = {t})")]
    StepFloor { t: f64, dt_min: f64 },

    #[error("regularized data overshoots the bound {bound} by {excess:e}")]
    BoundOvershoot { bound: f64, excess: f64 },

    #[error("invalid initial data specification: {0}")]
    Spec(String),

    #[error("requested range is outside the recorded run: {0}")]
    Range(String),

    #[error("initial means differ by {diff:e}")]
    MeanMismatch { diff: f64 },

    #[error("both trajectories start from identical data")]
    IdenticalInputs,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for FchError {
    fn from(e: std::io::Error) -> Self {
        FchError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for FchError {
    fn from(e: serde_json::Error) -> Self {
        FchError::Io(e.to_string())
    }
}
