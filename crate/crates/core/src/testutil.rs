//! Deterministic smooth random fields for unit tests.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::field::ScalarField;
use crate::grid::{Boundary, Grid};

/// Sum of `modes` random basis functions with per-axis index below
/// `max_index`, shifted to `mean` and scaled so that `max |u - mean| = amp`.
pub fn smooth_field(
    grid: &Arc<Grid>,
    seed: u64,
    modes: usize,
    max_index: usize,
    mean: f64,
    amp: f64,
) -> ScalarField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bc = grid.bc();
    let terms: Vec<(Vec<f64>, f64, f64)> = (0..modes)
        .map(|_| {
            let k = grid
                .lengths()
                .iter()
                .map(|l| {
                    let m = rng.gen_range(0..max_index) as f64;
                    match bc {
                        Boundary::NeumannCosine => PI * m / l,
                        Boundary::PeriodicFourier => 2.0 * PI * m / l,
                    }
                })
                .collect();
            (k, rng.gen_range(-1.0..1.0), rng.gen_range(0.0..2.0 * PI))
        })
        .collect();
    let raw = ScalarField::from_fn(grid, |x| {
        terms
            .iter()
            .map(|(k, c, ph)| {
                c * k
                    .iter()
                    .zip(x)
                    .map(|(k, x)| match bc {
                        Boundary::NeumannCosine => (k * x).cos(),
                        Boundary::PeriodicFourier => (k * x + ph).cos(),
                    })
                    .product::<f64>()
            })
            .sum()
    });
    let m = raw.mean();
    let centered = raw.map(|v| v - m);
    let s = centered.max_abs();
    let s = if s > 0.0 { amp / s } else { 0.0 };
    centered.map(|v| mean + s * v)
}
