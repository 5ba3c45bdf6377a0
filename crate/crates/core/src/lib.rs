pub mod error;
pub mod field;
pub mod grid;
pub mod potential;
pub mod spectral;
pub mod sum;
pub mod model;
pub mod krylov;
pub mod stepper;
pub mod initdata;
pub mod snapshot;
pub mod diagnostics;
pub mod verify;
#[cfg(test)]
pub(crate) mod testutil;

pub use diagnostics::{LedgerRow, RunLedger};
pub use error::{FchError, Result};
pub use field::ScalarField;
pub use grid::{Boundary, Grid};
pub use initdata::{InitialKind, InitialSpec};
pub use model::{Dealias, EnergyBreakdown, Model, MuFormulation};
pub use potential::{PotentialParams, TruncationLevel};
pub use stepper::{advance, AdvanceSummary, NoObserver, Scheme, SolverConfig, Stabilization, StepObserver};
