//! Forward/backward transforms, diagonal operators and spectral
//! resampling.
//!
//! Cosine coefficients are amplitudes: `u(x) = Σ c_m ∏ cos(π m_i x_i / L_i)`.
//! Fourier coefficients are normalized the same way:
//! `u(x) = Σ c_k exp(i k·x)`. In both cases the mode-0 coefficient is the
//! mean of the samples.

use std::sync::Arc;

use rustfft::num_complex::Complex64;

use crate::error::{FchError, Result};
use crate::field::ScalarField;
use crate::grid::{for_each_line, AxisPlan, Boundary, Grid};
use crate::sum::pairwise_sum_by;

#[derive(Debug, Clone, PartialEq)]
pub enum Coeffs {
    Cosine(Vec<f64>),
    Fourier(Vec<Complex64>),
}

#[derive(Debug, Clone)]
pub struct Spectrum {
    grid: Arc<Grid>,
    coeffs: Coeffs,
}

impl Spectrum {
    pub fn forward(u: &ScalarField) -> Spectrum {
        let grid = u.grid().clone();
        let counts = grid.counts().to_vec();
        let coeffs = match grid.bc() {
            Boundary::NeumannCosine => {
                let mut data = u.values().to_vec();
                for axis in 0..grid.dim() {
                    let AxisPlan::Cosine(plan) = grid.plan(axis) else { unreachable!() };
                    let n = counts[axis];
                    let mut scratch = vec![0.0; plan.get_scratch_len()];
                    let (s0, s) = (1.0 / n as f64, 2.0 / n as f64);
                    for_each_line(&mut data, &counts, axis, |line| {
                        plan.process_dct2_with_scratch(line, &mut scratch);
                        line[0] *= s0;
                        line[1..].iter_mut().for_each(|v| *v *= s);
                    });
                }
                Coeffs::Cosine(data)
            }
            Boundary::PeriodicFourier => {
                let mut data: Vec<Complex64> =
                    u.values().iter().map(|&v| Complex64::new(v, 0.0)).collect();
                for axis in 0..grid.dim() {
                    let AxisPlan::Fourier { forward, .. } = grid.plan(axis) else { unreachable!() };
                    let scale = 1.0 / counts[axis] as f64;
                    let mut scratch =
                        vec![Complex64::default(); forward.get_inplace_scratch_len()];
                    for_each_line(&mut data, &counts, axis, |line| {
                        forward.process_with_scratch(line, &mut scratch);
                        line.iter_mut().for_each(|v| *v *= scale);
                    });
                }
                Coeffs::Fourier(data)
            }
        };
        Spectrum { grid, coeffs }
    }

    pub fn backward(&self) -> ScalarField {
        let grid = &self.grid;
        let counts = grid.counts();
        let values = match &self.coeffs {
            Coeffs::Cosine(c) => {
                let mut data = c.clone();
                for axis in 0..grid.dim() {
                    let AxisPlan::Cosine(plan) = grid.plan(axis) else { unreachable!() };
                    let mut scratch = vec![0.0; plan.get_scratch_len()];
                    for_each_line(&mut data, counts, axis, |line| {
                        line[0] *= 2.0;
                        plan.process_dct3_with_scratch(line, &mut scratch);
                    });
                }
                data
            }
            Coeffs::Fourier(c) => {
                let mut data = c.clone();
                for axis in 0..grid.dim() {
                    let AxisPlan::Fourier { inverse, .. } = grid.plan(axis) else { unreachable!() };
                    let mut scratch =
                        vec![Complex64::default(); inverse.get_inplace_scratch_len()];
                    for_each_line(&mut data, counts, axis, |line| {
                        inverse.process_with_scratch(line, &mut scratch);
                    });
                }
                data.into_iter().map(|z| z.re).collect()
            }
        };
        ScalarField::from_parts(grid.clone(), values)
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn coeffs(&self) -> &Coeffs {
        &self.coeffs
    }

    /// Coefficient magnitude of the mode at flat position `flat`.
    pub fn magnitude(&self, flat: usize) -> f64 {
        match &self.coeffs {
            Coeffs::Cosine(c) => c[flat].abs(),
            Coeffs::Fourier(c) => c[flat].norm(),
        }
    }

    /// Mode-0 coefficient (the mean).
    pub fn mode0(&self) -> f64 {
        match &self.coeffs {
            Coeffs::Cosine(c) => c[0],
            Coeffs::Fourier(c) => c[0].re,
        }
    }

    /// Multiplies every mode by `f(eigenvalue of -Δ)`.
    pub fn apply_symbol(&mut self, f: impl Fn(f64) -> f64) {
        let symbol = self.grid.symbol();
        match &mut self.coeffs {
            Coeffs::Cosine(c) => c.iter_mut().zip(symbol).for_each(|(v, &s)| *v *= f(s)),
            Coeffs::Fourier(c) => c.iter_mut().zip(symbol).for_each(|(v, &s)| *v *= f(s)),
        }
    }

    pub fn with_symbol(&self, f: impl Fn(f64) -> f64) -> Spectrum {
        let mut out = self.clone();
        out.apply_symbol(f);
        out
    }

    /// Mode-wise `p(s) self + q(s) other` where `(p, q) = f(s)` and `s` is
    /// the eigenvalue of `-Δ`.
    pub fn combine(&self, other: &Spectrum, f: impl Fn(f64) -> (f64, f64)) -> Result<Spectrum> {
        if !self.grid.same_shape(&other.grid) {
            return Err(FchError::Shape("spectra live on different grids".into()));
        }
        let symbol = self.grid.symbol();
        let coeffs = match (&self.coeffs, &other.coeffs) {
            (Coeffs::Cosine(a), Coeffs::Cosine(b)) => Coeffs::Cosine(
                symbol
                    .iter()
                    .zip(a.iter().zip(b))
                    .map(|(&s, (x, y))| {
                        let (p, q) = f(s);
                        p * x + q * y
                    })
                    .collect(),
            ),
            (Coeffs::Fourier(a), Coeffs::Fourier(b)) => Coeffs::Fourier(
                symbol
                    .iter()
                    .zip(a.iter().zip(b))
                    .map(|(&s, (x, y))| {
                        let (p, q) = f(s);
                        x * p + y * q
                    })
                    .collect(),
            ),
            _ => unreachable!("same grid implies same basis"),
        };
        Ok(Spectrum { grid: self.grid.clone(), coeffs })
    }

    /// `∫ (F(A) u) v` for `u = self`, `v = other`, where `F(A)` is the
    /// diagonal operator with symbol `f`.
    pub fn bilinear(&self, other: &Spectrum, f: impl Fn(f64) -> f64) -> Result<f64> {
        if !self.grid.same_shape(&other.grid) {
            return Err(FchError::Shape("spectra live on different grids".into()));
        }
        let symbol = self.grid.symbol();
        let w = self.grid.parseval_weights();
        let s = match (&self.coeffs, &other.coeffs) {
            (Coeffs::Cosine(a), Coeffs::Cosine(b)) => {
                pairwise_sum_by(a.len(), |i| w[i] * f(symbol[i]) * a[i] * b[i])
            }
            (Coeffs::Fourier(a), Coeffs::Fourier(b)) => {
                pairwise_sum_by(a.len(), |i| f(symbol[i]) * (a[i] * b[i].conj()).re)
            }
            _ => unreachable!("same grid implies same basis"),
        };
        Ok(s * self.grid.volume())
    }

    /// `∫ (F(A) u) u`.
    pub fn quadratic_form(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.bilinear(self, f).expect("same grid")
    }

    /// Re-expresses the same band-limited function on `target`
    /// (zero-padding when refining, truncation when coarsening).
    pub fn resample(&self, target: &Arc<Grid>) -> Result<Spectrum> {
        let src = &self.grid;
        if src.dim() != target.dim() || src.lengths() != target.lengths() || src.bc() != target.bc() {
            return Err(FchError::Shape("resampling requires the same box and boundary".into()));
        }
        let mut counts = src.counts().to_vec();
        let coeffs = match &self.coeffs {
            Coeffs::Cosine(c) => {
                let mut data = c.clone();
                for axis in 0..src.dim() {
                    let n_to = target.counts()[axis];
                    data = resample_axis(&data, &counts, axis, n_to, |line, out| {
                        let m = line.len().min(out.len());
                        out[..m].copy_from_slice(&line[..m]);
                    });
                    counts[axis] = n_to;
                }
                Coeffs::Cosine(data)
            }
            Coeffs::Fourier(c) => {
                let mut data = c.clone();
                for axis in 0..src.dim() {
                    let n_to = target.counts()[axis];
                    data = resample_axis(&data, &counts, axis, n_to, resample_fourier_line);
                    counts[axis] = n_to;
                }
                Coeffs::Fourier(data)
            }
        };
        Ok(Spectrum { grid: target.clone(), coeffs })
    }
}

fn resample_axis<T: Copy + Default>(
    data: &[T],
    counts: &[usize],
    axis: usize,
    n_to: usize,
    map: impl Fn(&[T], &mut [T]),
) -> Vec<T> {
    let n_from = counts[axis];
    let inner: usize = counts[axis + 1..].iter().product();
    let outer: usize = counts[..axis].iter().product();
    let mut out = vec![T::default(); outer * n_to * inner];
    let mut line = vec![T::default(); n_from];
    let mut res = vec![T::default(); n_to];
    for o in 0..outer {
        for i in 0..inner {
            for (j, v) in line.iter_mut().enumerate() {
                *v = data[o * n_from * inner + j * inner + i];
            }
            res.iter_mut().for_each(|v| *v = T::default());
            map(&line, &mut res);
            for (j, v) in res.iter().enumerate() {
                out[o * n_to * inner + j * inner + i] = *v;
            }
        }
    }
    out
}

/// Maps signed wavenumbers between FFT orderings. A Nyquist coefficient is
/// the cosine mode `c (e^{iKx} + e^{-iKx})/2`, so it is split when refining
/// and re-combined when coarsening.
fn resample_fourier_line(line: &[Complex64], out: &mut [Complex64]) {
    let (nf, nt) = (line.len() as isize, out.len() as isize);
    let idx = |k: isize, n: isize| k.rem_euclid(n) as usize;
    let (hf, ht) = (nf / 2, nt / 2);
    for k in -hf..=hf {
        let c = if k.abs() == hf { line[idx(hf, nf)] * 0.5 } else { line[idx(k, nf)] };
        if k.abs() < ht {
            out[idx(k, nt)] += c;
        } else if k.abs() == ht {
            out[idx(ht, nt)] += c;
        }
    }
}

/// `∂u/∂x_axis` evaluated at the samples.
pub(crate) fn partial_derivative(u: &ScalarField, axis: usize) -> Vec<f64> {
    let grid = u.grid();
    let counts = grid.counts();
    let k = grid.wavenumbers(axis);
    let n = counts[axis];
    match grid.plan(axis) {
        AxisPlan::Cosine(plan) => {
            let mut data = u.values().to_vec();
            let mut scratch = vec![0.0; plan.get_scratch_len()];
            let s = 2.0 / n as f64;
            for_each_line(&mut data, counts, axis, |line| {
                plan.process_dct2_with_scratch(line, &mut scratch);
                // d/dx cos(k_m x) = -k_m sin(k_m x); DST-III input i holds mode i + 1
                for i in 0..n - 1 {
                    line[i] = -s * line[i + 1] * k[i + 1];
                }
                line[n - 1] = 0.0;
                plan.process_dst3_with_scratch(line, &mut scratch);
            });
            data
        }
        AxisPlan::Fourier { forward, inverse } => {
            let mut data: Vec<Complex64> =
                u.values().iter().map(|&v| Complex64::new(v, 0.0)).collect();
            let len = forward.get_inplace_scratch_len().max(inverse.get_inplace_scratch_len());
            let mut scratch = vec![Complex64::default(); len];
            let scale = 1.0 / n as f64;
            for_each_line(&mut data, counts, axis, |line| {
                forward.process_with_scratch(line, &mut scratch);
                for (m, v) in line.iter_mut().enumerate() {
                    // the Nyquist mode has no real-valued derivative
                    let km = if m == n / 2 { 0.0 } else { k[m] };
                    *v *= Complex64::new(0.0, km * scale);
                }
                inverse.process_with_scratch(line, &mut scratch);
            });
            data.into_iter().map(|z| z.re).collect()
        }
    }
}
