use std::fmt;

use fch_core::FchError;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Solver(FchError),
    /// Names of the failed checks.
    Verify(Vec<String>),
    /// Sweep members that failed, with their messages.
    Sweep(Vec<String>),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Solver(_) | CliError::Sweep(_) | CliError::Io(_) => 2,
            CliError::Verify(_) => 3,
        }
    }
}

/// The invariant a solver error reports on.
pub fn invariant(e: &FchError) -> &'static str {
    match e {
        FchError::Domain { .. } => "admissibility (-1 < u < 1)",
        FchError::StepFloor { .. } => "energy dissipation",
        FchError::GuardViolation { .. } => "Newton guard |u| <= bound",
        FchError::NewtonDivergence { .. } => "implicit solve convergence",
        FchError::BoundOvershoot { .. } => "regularized data bound",
        FchError::Mean { .. } | FchError::MeanMismatch { .. } => "mass (zero-mean) condition",
        FchError::IdenticalInputs => "distinct initial data",
        FchError::Overflow { .. } => "finite energy integrand",
        FchError::Range(_) => "ledger time range",
        FchError::Shape(_) => "grid compatibility",
        FchError::Spec(_) | FchError::Config(_) => "configuration",
        FchError::Io(_) => "output",
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Solver(e) => write!(f, "solver failure [{}]: {e}", invariant(e)),
            CliError::Verify(names) => write!(f, "verify failed: {}", names.join(", ")),
            CliError::Sweep(runs) => write!(f, "solver failure in sweep: {}", runs.join("; ")),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<FchError> for CliError {
    fn from(e: FchError) -> Self {
        match e {
            FchError::Spec(m) | FchError::Config(m) => CliError::Config(m),
            FchError::Io(m) => CliError::Io(m),
            other => CliError::Solver(other),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
