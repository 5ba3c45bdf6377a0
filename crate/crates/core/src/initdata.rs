//! Admissible initial states and the regularization used by the
//! truncated-potential scheme.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{FchError, Result};
use crate::field::ScalarField;
use crate::grid::{Boundary, Grid};
use crate::potential::TruncationLevel;

/// Generated states stay this far inside the open interval.
pub const INITIAL_MARGIN: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialKind {
    Constant,
    /// `tanh` profile across axis 0 (a pair of interfaces on periodic boxes).
    TanhInterface,
    /// Random combination of all modes up to `cutoff` in every axis.
    BandLimitedNoise,
    /// `cos(2π · mode · x₀ / L₀)`.
    SingleMode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSpec {
    pub kind: InitialKind,
    pub mean: f64,
    #[serde(default)]
    pub amplitude: f64,
    #[serde(default)]
    pub seed: u64,
    /// Interface position along axis 0; defaults to the box centre.
    #[serde(default)]
    pub position: Option<f64>,
    /// Interface width; defaults to `L₀ / 32`.
    #[serde(default)]
    pub width: Option<f64>,
    #[serde(default)]
    pub mode: Option<u32>,
    /// Largest mode index per axis for the noise; defaults to 16.
    #[serde(default)]
    pub cutoff: Option<usize>,
}

impl InitialSpec {
    pub fn constant(mean: f64) -> Self {
        Self::new(InitialKind::Constant, mean, 0.0)
    }

    pub fn noise(mean: f64, amplitude: f64, seed: u64, cutoff: usize) -> Self {
        Self { seed, cutoff: Some(cutoff), ..Self::new(InitialKind::BandLimitedNoise, mean, amplitude) }
    }

    pub fn single_mode(mean: f64, amplitude: f64, mode: u32) -> Self {
        Self { mode: Some(mode), ..Self::new(InitialKind::SingleMode, mean, amplitude) }
    }

    pub fn tanh_interface(mean: f64, amplitude: f64, position: f64, width: f64) -> Self {
        Self {
            position: Some(position),
            width: Some(width),
            ..Self::new(InitialKind::TanhInterface, mean, amplitude)
        }
    }

    fn new(kind: InitialKind, mean: f64, amplitude: f64) -> Self {
        Self { kind, mean, amplitude, seed: 0, position: None, width: None, mode: None, cutoff: None }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(FchError::Spec(m));
        if !(self.mean.is_finite() && self.mean.abs() < 1.0) {
            return bad(format!("mean {} violates -1 < m < 1", self.mean));
        }
        if !(self.amplitude.is_finite() && self.amplitude >= 0.0) {
            return bad(format!("amplitude must be nonnegative, got {}", self.amplitude));
        }
        if let Some(w) = self.width {
            if !(w.is_finite() && w > 0.0) {
                return bad(format!("interface width must be positive, got {w}"));
            }
        }
        if self.position.is_some_and(|p| !p.is_finite()) {
            return bad("interface position must be finite".into());
        }
        if self.mode == Some(0) {
            return bad("mode index must be positive".into());
        }
        if self.cutoff == Some(0) {
            return bad("noise cutoff must be positive".into());
        }
        Ok(())
    }
}

/// Deterministic admissible field described by `spec`.
pub fn generate(spec: &InitialSpec, grid: &Arc<Grid>) -> Result<ScalarField> {
    spec.validate()?;
    let m = spec.mean;
    let a = spec.amplitude;
    let l0 = grid.lengths()[0];
    let u = match spec.kind {
        InitialKind::Constant => ScalarField::constant(grid, m),
        InitialKind::SingleMode => {
            let mode = spec.mode.unwrap_or(1) as usize;
            if 2 * mode >= grid.counts()[0] {
                return Err(FchError::Spec(format!(
                    "mode {mode} is not resolved by {} samples",
                    grid.counts()[0]
                )));
            }
            let k = 2.0 * PI * mode as f64 / l0;
            ScalarField::from_fn(grid, |x| m + a * (k * x[0]).cos())
        }
        InitialKind::TanhInterface => {
            let pos = spec.position.unwrap_or(0.5 * l0);
            let w = spec.width.unwrap_or(l0 / 32.0);
            let raw = match grid.bc() {
                Boundary::NeumannCosine => ScalarField::from_fn(grid, |x| ((x[0] - pos) / w).tanh()),
                Boundary::PeriodicFourier => {
                    // slope 1/w at x = pos and at pos + L/2
                    let k = 2.0 * PI / l0;
                    ScalarField::from_fn(grid, |x| ((k * (x[0] - pos)).sin() / (k * w)).tanh())
                }
            };
            with_mean(raw.scale(a), m)
        }
        InitialKind::BandLimitedNoise => {
            let raw = band_limited(grid, spec.cutoff.unwrap_or(16), spec.seed)?;
            let dev = raw.max_abs();
            let raw = if dev > 0.0 { raw.scale(a / dev) } else { raw };
            with_mean(raw, m)
        }
    };
    let peak = u.max_abs();
    if peak > 1.0 - INITIAL_MARGIN {
        return Err(FchError::Spec(format!(
            "generated state reaches |u| = {peak}; reduce the amplitude for mean {m}"
        )));
    }
    Ok(u)
}

fn with_mean(u: ScalarField, m: f64) -> ScalarField {
    let shift = m - u.mean();
    let u = u.map(|v| v + shift);
    // one more pass removes the rounding of the first shift
    let shift = m - u.mean();
    u.map(|v| v + shift)
}

/// Zero-mean sum of random modes with per-axis index `1..=cutoff` (and
/// zero), synthesized pointwise so that it does not depend on the sampling.
fn band_limited(grid: &Arc<Grid>, cutoff: usize, seed: u64) -> Result<ScalarField> {
    let dim = grid.dim();
    for (axis, &n) in grid.counts().iter().enumerate() {
        if 2 * cutoff >= n {
            return Err(FchError::Spec(format!(
                "noise cutoff {cutoff} is not resolved by {n} samples along axis {axis}"
            )));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let periodic = grid.bc() == Boundary::PeriodicFourier;
    // mode index per axis: Neumann 0..=c, periodic -c..=c
    let range: Vec<i64> = if periodic {
        (-(cutoff as i64)..=cutoff as i64).collect()
    } else {
        (0..=cutoff as i64).collect()
    };
    let total = range.len().pow(dim as u32);
    let mut modes = Vec::with_capacity(total);
    for flat in 0..total {
        let mut rem = flat;
        let mut idx = [0i64; 3];
        for slot in idx.iter_mut().take(dim).rev() {
            *slot = range[rem % range.len()];
            rem /= range.len();
        }
        let c: f64 = rng.gen_range(-1.0..1.0);
        let phase: f64 = rng.gen_range(0.0..2.0 * PI);
        if idx[..dim].iter().all(|&i| i == 0) {
            continue;
        }
        modes.push((idx, c, phase));
    }
    let lengths = grid.lengths().to_vec();
    let raw = ScalarField::from_fn(grid, |x| {
        modes
            .iter()
            .map(|(idx, c, phase)| {
                if periodic {
                    let arg: f64 = (0..dim).map(|a| 2.0 * PI * idx[a] as f64 * x[a] / lengths[a]).sum();
                    c * (arg + phase).cos()
                } else {
                    c * (0..dim).map(|a| (PI * idx[a] as f64 * x[a] / lengths[a]).cos()).product::<f64>()
                }
            })
            .sum()
    });
    let mean = raw.mean();
    Ok(raw.map(|v| v - mean))
}

/// Two resolvent smoothings of the contracted data,
/// `(I + A/n)⁻¹(I + A/n)⁻¹((1 - 2/n) u₀)`, followed by a check that the
/// result respects `|u| ≤ 1 - 2/n` up to `1e-8 ‖u₀‖∞`.
pub fn regularize_initial(u0: &ScalarField, lvl: TruncationLevel) -> Result<ScalarField> {
    let peak = u0.max_abs();
    if !(peak <= 1.0) {
        let value = if u0.max().abs() >= u0.min().abs() { u0.max() } else { u0.min() };
        return Err(FchError::Domain { value, interval: "[-1, 1]" });
    }
    let mean = u0.mean();
    if mean.abs() >= 1.0 {
        return Err(FchError::Spec(format!("mean {mean} violates -1 < m < 1")));
    }
    let n = lvl.n() as f64;
    let tau = 1.0 / n;
    let out = u0.scale(1.0 - 2.0 / n).resolvent(tau)?.resolvent(tau)?;
    let bound = 1.0 - 2.0 / n;
    let excess = out.max_abs() - bound;
    if excess > 1e-8 * peak {
        return Err(FchError::BoundOvershoot { bound, excess });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::eval_beta;
    use crate::testutil::smooth_field;

    fn line(bc: Boundary, l: f64, n: usize) -> Arc<Grid> {
        Grid::new(&[l], &[n], bc).unwrap()
    }

    fn lvl(n: u32) -> TruncationLevel {
        TruncationLevel::new(n).unwrap()
    }

    #[test]
    fn constant_and_single_mode() {
        let g = line(Boundary::NeumannCosine, 4.0, 64);
        let u = generate(&InitialSpec::constant(0.2), &g).unwrap();
        assert!(u.values().iter().all(|&v| v == 0.2));

        let u = generate(&InitialSpec::single_mode(0.0, 1e-6, 3), &g).unwrap();
        assert!(u.mean().abs() <= 1e-14);
        let expect = ScalarField::from_fn(&g, |x| 1e-6 * (3.0 * 2.0 * PI * x[0] / 4.0).cos());
        assert!(u.sub(&expect).unwrap().max_abs() <= 1e-20);
        assert!(generate(&InitialSpec::single_mode(0.0, 0.1, 40), &g).is_err());
    }

    #[test]
    fn noise_is_deterministic_and_admissible() {
        for bc in [Boundary::NeumannCosine, Boundary::PeriodicFourier] {
            let g = Grid::new(&[8.0, 6.0], &[32, 48], bc).unwrap();
            let spec = InitialSpec::noise(0.0, 0.05, 42, 6);
            let a = generate(&spec, &g).unwrap();
            let b = generate(&spec, &g).unwrap();
            assert_eq!(a, b);
            assert!(a.mean().abs() <= 1e-12);
            assert!((a.max_abs() - 0.05).abs() < 1e-3);
            let c = generate(&InitialSpec { seed: 43, ..spec.clone() }, &g).unwrap();
            assert_ne!(a, c);

            let spec = InitialSpec::noise(0.3, 0.4, 1, 6);
            let u = generate(&spec, &g).unwrap();
            assert!((u.mean() - 0.3).abs() <= 1e-12);
        }
    }

    #[test]
    fn noise_is_independent_of_resolution() {
        let coarse = line(Boundary::NeumannCosine, 10.0, 64);
        let fine = line(Boundary::NeumannCosine, 10.0, 256);
        let spec = InitialSpec::noise(0.0, 0.1, 5, 10);
        let a = generate(&spec, &coarse).unwrap();
        let b = generate(&spec, &fine).unwrap();
        // same function up to the sample-dependent normalization
        let a_up = a.resample(&fine).unwrap();
        let s = b.max_abs() / a_up.max_abs();
        assert!(a_up.scale(s).sub(&b).unwrap().max_abs() <= 1e-10);
        assert!((s - 1.0).abs() < 0.05);
    }

    #[test]
    fn tanh_interface() {
        for bc in [Boundary::NeumannCosine, Boundary::PeriodicFourier] {
            let g = line(bc, 10.0, 256);
            let u = generate(&InitialSpec::tanh_interface(0.1, 0.8, 5.0, 0.5), &g).unwrap();
            assert!((u.mean() - 0.1).abs() <= 1e-12);
            assert!(u.max_abs() < 1.0);
        }
    }

    #[test]
    fn invalid_specs() {
        let g = line(Boundary::NeumannCosine, 4.0, 64);
        for spec in [
            InitialSpec::constant(1.0),
            InitialSpec::constant(-1.5),
            InitialSpec::noise(0.9, 0.2, 0, 4),
            InitialSpec::noise(0.0, -0.1, 0, 4),
            InitialSpec::noise(0.0, 0.1, 0, 40),
            InitialSpec::single_mode(0.0, 0.1, 0),
        ] {
            assert!(matches!(generate(&spec, &g), Err(FchError::Spec(_))), "{spec:?}");
        }
    }

    #[test]
    fn regularization_of_constants() {
        let g = line(Boundary::NeumannCosine, 4.0, 64);
        for m in [0.0, 0.4, -0.95] {
            let u = ScalarField::constant(&g, m);
            let out = regularize_initial(&u, lvl(10)).unwrap();
            assert!(out.values().iter().all(|v| (v - 0.8 * m).abs() <= 1e-15));
        }
    }

    #[test]
    fn regularization_mean_and_smoothing() {
        let g = line(Boundary::NeumannCosine, 8.0, 256);
        for seed in 0..20 {
            let u = smooth_field(&g, seed, 8, 20, 0.3, 0.6);
            let out = regularize_initial(&u, lvl(10)).unwrap();
            assert!((out.mean() - 0.24).abs() <= 1e-13);
            assert!(out.h1_seminorm() <= u.scale(0.8).h1_seminorm());
            assert!(out.max_abs() <= 0.8 + 1e-8 * u.max_abs());
        }
    }

    #[test]
    fn regularization_controls_beta() {
        let g = line(Boundary::NeumannCosine, 8.0, 256);
        let beta_l2 = |u: &ScalarField| u.map(|r| eval_beta(r).unwrap().0).l2_norm();
        for seed in 0..50 {
            let amp = 0.5 + 0.499 * (seed as f64 / 50.0);
            let u = smooth_field(&g, 300 + seed, 6, 12, 0.0, amp);
            for n in [10, 40] {
                let out = regularize_initial(&u, lvl(n)).unwrap();
                assert!(beta_l2(&out) <= 2.0 * (1.0 + beta_l2(&u)));
            }
        }
    }

    #[test]
    fn regularization_converges() {
        let g = line(Boundary::NeumannCosine, 8.0, 256);
        let u = smooth_field(&g, 1, 8, 12, 0.1, 0.7);
        let dist: Vec<f64> = [10, 20, 40, 80]
            .iter()
            .map(|&n| regularize_initial(&u, lvl(n)).unwrap().sub(&u).unwrap().h2_norm())
            .collect();
        assert!(dist.windows(2).all(|w| w[1] < w[0]), "{dist:?}");
    }

    #[test]
    fn regularization_rejects_bad_input() {
        let g = line(Boundary::NeumannCosine, 8.0, 64);
        assert!(regularize_initial(&ScalarField::constant(&g, 1.2), lvl(10)).is_err());
        // the spectral resolvent is not a discrete maximum principle: a
        // unit step overshoots the bound
        let step = ScalarField::from_fn(&g, |x| if x[0] < 4.0 { 1.0 } else { -1.0 });
        assert!(matches!(
            regularize_initial(&step, lvl(80)),
            Err(FchError::BoundOvershoot { .. })
        ));
    }
}
