//! Uniform box grids and the spectral transforms that diagonalize the
//! Laplacian under Neumann (cosine) or periodic (Fourier) conditions.
//!
//! Samples are stored in row-major order: axis 0 varies slowest.
//!
//! * `NeumannCosine`: cell-centred samples `x_j = (j + ½) h`, expanded in
//!   `cos(π m x / L)`. Every basis function has zero normal derivative at
//!   both faces, so `∂ₙu = ∂ₙΔu = ∂ₙμ = 0` for every representable field.
//! * `PeriodicFourier`: samples `x_j = j h`, expanded in `exp(2πi k x / L)`.

use std::fmt;
use std::sync::Arc;

use rustdct::{DctPlanner, TransformType2And3};
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{FchError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    NeumannCosine,
    PeriodicFourier,
}

#[derive(Clone)]
pub(crate) enum AxisPlan {
    Cosine(Arc<dyn TransformType2And3<f64>>),
    Fourier { forward: Arc<dyn Fft<f64>>, inverse: Arc<dyn Fft<f64>> },
}

/// A box `∏ (0, L_i)` with `N_i` samples per axis.
#[derive(Clone)]
pub struct Grid {
    lengths: Vec<f64>,
    counts: Vec<usize>,
    bc: Boundary,
    wavenumbers: Vec<Vec<f64>>,
    symbol: Vec<f64>,
    parseval: Vec<f64>,
    plans: Vec<AxisPlan>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("lengths", &self.lengths)
            .field("counts", &self.counts)
            .field("bc", &self.bc)
            .finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.same_shape(other)
    }
}

pub const MIN_SAMPLES_PER_AXIS: usize = 4;

impl Grid {
    pub fn new(lengths: &[f64], counts: &[usize], bc: Boundary) -> Result<Arc<Grid>> {
        let dim = lengths.len();
        if !(1..=3).contains(&dim) || counts.len() != dim {
            return Err(FchError::Config(format!(
                "grid needs 1 to 3 axes with one length and one count each (got {} lengths, {} counts)",
                lengths.len(),
                counts.len()
            )));
        }
        if let Some(l) = lengths.iter().find(|l| !(l.is_finite() && **l > 0.0)) {
            return Err(FchError::Config(format!("box lengths must be positive (got {l})")));
        }
        if let Some(n) = counts.iter().find(|n| **n < MIN_SAMPLES_PER_AXIS) {
            return Err(FchError::Config(format!(
                "at least {MIN_SAMPLES_PER_AXIS} samples per axis are required (got {n})"
            )));
        }
        if bc == Boundary::PeriodicFourier && counts.iter().any(|n| n % 2 != 0) {
            return Err(FchError::Config("periodic grids need even sample counts".into()));
        }

        let wavenumbers: Vec<Vec<f64>> = lengths
            .iter()
            .zip(counts)
            .map(|(&l, &n)| axis_wavenumbers(bc, l, n))
            .collect();
        let total: usize = counts.iter().product();
        let mut symbol = vec![0.0; total];
        let mut parseval = vec![1.0; total];
        for (flat, (s, w)) in symbol.iter_mut().zip(parseval.iter_mut()).enumerate() {
            let mut rem = flat;
            for axis in (0..dim).rev() {
                let m = rem % counts[axis];
                rem /= counts[axis];
                let k = wavenumbers[axis][m];
                *s += k * k;
                if bc == Boundary::NeumannCosine && m > 0 {
                    *w *= 0.5;
                }
            }
        }

        let mut dct = DctPlanner::new();
        let mut fft = FftPlanner::new();
        let plans = counts
            .iter()
            .map(|&n| match bc {
                Boundary::NeumannCosine => AxisPlan::Cosine(dct.plan_dct2(n)),
                Boundary::PeriodicFourier => AxisPlan::Fourier {
                    forward: fft.plan_fft_forward(n),
                    inverse: fft.plan_fft_inverse(n),
                },
            })
            .collect();

        Ok(Arc::new(Grid {
            lengths: lengths.to_vec(),
            counts: counts.to_vec(),
            bc,
            wavenumbers,
            symbol,
            parseval,
            plans,
        }))
    }

    pub fn dim(&self) -> usize {
        self.counts.len()
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn bc(&self) -> Boundary {
        self.bc
    }

    pub fn len(&self) -> usize {
        self.symbol.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbol.is_empty()
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.lengths[axis] / self.counts[axis] as f64
    }

    /// Quadrature weight of every sample.
    pub fn cell_volume(&self) -> f64 {
        (0..self.dim()).map(|a| self.spacing(a)).product()
    }

    /// `|Ω|`.
    pub fn volume(&self) -> f64 {
        self.lengths.iter().product()
    }

    pub fn max_length(&self) -> f64 {
        self.lengths.iter().cloned().fold(0.0, f64::max)
    }

    /// Eigenvalue of `-Δ` for every spectral mode, in flat mode order.
    /// Mode 0 is exactly zero.
    pub fn symbol(&self) -> &[f64] {
        &self.symbol
    }

    /// Per-axis wavenumbers, in transform order (signed for Fourier axes).
    pub fn wavenumbers(&self, axis: usize) -> &[f64] {
        &self.wavenumbers[axis]
    }

    /// `∫ φ_m²/|Ω|` for the basis function of each mode.
    pub(crate) fn parseval_weights(&self) -> &[f64] {
        &self.parseval
    }

    pub(crate) fn plan(&self, axis: usize) -> &AxisPlan {
        &self.plans[axis]
    }

    /// Coordinate of sample `j` along `axis`.
    pub fn coordinate(&self, axis: usize, j: usize) -> f64 {
        let h = self.spacing(axis);
        match self.bc {
            Boundary::NeumannCosine => (j as f64 + 0.5) * h,
            Boundary::PeriodicFourier => j as f64 * h,
        }
    }

    /// Multi-index of flat position `flat`.
    pub fn unflatten(&self, flat: usize) -> [usize; 3] {
        let mut idx = [0; 3];
        let mut rem = flat;
        for axis in (0..self.dim()).rev() {
            idx[axis] = rem % self.counts[axis];
            rem /= self.counts[axis];
        }
        idx
    }

    pub fn same_shape(&self, other: &Grid) -> bool {
        self.counts == other.counts && self.lengths == other.lengths && self.bc == other.bc
    }

    /// Same box and boundary with every sample count multiplied by `factor`.
    pub fn refined(&self, factor: usize) -> Result<Arc<Grid>> {
        let counts: Vec<usize> = self.counts.iter().map(|n| n * factor).collect();
        Grid::new(&self.lengths, &counts, self.bc)
    }
}

fn axis_wavenumbers(bc: Boundary, length: f64, n: usize) -> Vec<f64> {
    use std::f64::consts::PI;
    match bc {
        Boundary::NeumannCosine => (0..n).map(|m| PI * m as f64 / length).collect(),
        Boundary::PeriodicFourier => (0..n)
            .map(|m| {
                let signed = if m <= n / 2 { m as f64 } else { m as f64 - n as f64 };
                2.0 * PI * signed / length
            })
            .collect(),
    }
}

/// Runs `f` on every 1-D line of `data` along `axis`.
pub(crate) fn for_each_line<T: Copy + Default>(
    data: &mut [T],
    counts: &[usize],
    axis: usize,
    mut f: impl FnMut(&mut [T]),
) {
    let n = counts[axis];
    let inner: usize = counts[axis + 1..].iter().product();
    if inner == 1 {
        data.chunks_exact_mut(n).for_each(f);
        return;
    }
    let outer: usize = counts[..axis].iter().product();
    let mut line = vec![T::default(); n];
    for o in 0..outer {
        for i in 0..inner {
            let base = o * n * inner + i;
            for (j, v) in line.iter_mut().enumerate() {
                *v = data[base + j * inner];
            }
            f(&mut line);
            for (j, v) in line.iter().enumerate() {
                data[base + j * inner] = *v;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_invalid_grids() {
        assert!(Grid::new(&[1.0], &[3], Boundary::NeumannCosine).is_err());
        assert!(Grid::new(&[0.0], &[8], Boundary::NeumannCosine).is_err());
        assert!(Grid::new(&[1.0; 4], &[8; 4], Boundary::NeumannCosine).is_err());
        assert!(Grid::new(&[1.0, 1.0], &[8], Boundary::NeumannCosine).is_err());
        assert!(Grid::new(&[1.0], &[9], Boundary::PeriodicFourier).is_err());
        assert!(Grid::new(&[1.0], &[9], Boundary::NeumannCosine).is_ok());
    }

    #[test]
    fn symbol_invariants() {
        for bc in [Boundary::NeumannCosine, Boundary::PeriodicFourier] {
            let g = Grid::new(&[2.0, 3.0], &[8, 16], bc).unwrap();
            assert_eq!(g.symbol()[0], 0.0);
            assert!(g.symbol().iter().all(|&s| s >= 0.0));
            assert!((g.cell_volume() - 6.0 / 128.0).abs() < 1e-15);
            for axis in 0..2 {
                let mut ks: Vec<f64> = g.wavenumbers(axis).iter().map(|k| k.abs()).collect();
                if bc == Boundary::NeumannCosine {
                    assert!(ks.windows(2).all(|w| w[0] <= w[1]));
                }
                ks.sort_by(f64::total_cmp);
                assert_eq!(ks[0], 0.0);
            }
        }
    }

    #[test]
    fn line_iteration_touches_each_sample_once() {
        let counts = [3, 4, 5];
        let mut data: Vec<usize> = vec![0; 60];
        for axis in 0..3 {
            for_each_line(&mut data, &counts, axis, |line| {
                assert_eq!(line.len(), counts[axis]);
                line.iter_mut().for_each(|v| *v += 1);
            });
        }
        assert!(data.iter().all(|&v| v == 3));
    }
}
