//! Benchmark fixtures shared by the criterion benches.

use std::sync::Arc;

use fch_core::{Boundary, Grid, InitialSpec, PotentialParams, ScalarField};

/// Noisy benchmark state on `[0, 16]` with `n` points per axis.
pub fn state(dim: usize, n: usize, bc: Boundary) -> (Arc<Grid>, ScalarField) {
    let grid = Grid::new(&vec![16.0; dim], &vec![n; dim], bc).expect("grid");
    let u = fch_core::initdata::generate(&InitialSpec::noise(0.2, 0.05, 42, 16.min(n / 4)), &grid).expect("state");
    (grid, u)
}

pub fn params() -> PotentialParams {
    PotentialParams::new(3.0, 1.0).expect("params")
}
