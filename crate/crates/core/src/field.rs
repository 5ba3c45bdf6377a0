//! Sampled scalar fields and the operator calculus built on the grid's
//! spectral basis: powers of `A = -Δ`, the resolvent `(I + τA)⁻¹`, the
//! inverse `𝒩` on zero-mean fields, and the norms used by the diagnostics.

use std::sync::Arc;

use crate::error::{FchError, Result};
use crate::grid::Grid;
use crate::spectral::{partial_derivative, Spectrum};
use crate::sum::{pairwise_sum, pairwise_sum_by};

/// Relative tolerance for the zero-mean precondition of `𝒩`.
pub const ZERO_MEAN_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpNorm {
    L1,
    L2,
    Inf,
}

#[derive(Debug, Clone)]
pub struct ScalarField {
    grid: Arc<Grid>,
    values: Vec<f64>,
}

impl PartialEq for ScalarField {
    fn eq(&self, other: &Self) -> bool {
        self.grid.same_shape(&other.grid) && self.values == other.values
    }
}

impl ScalarField {
    pub fn new(grid: Arc<Grid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(FchError::Shape(format!(
                "{} values for a grid of {} samples",
                values.len(),
                grid.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(FchError::Shape(format!("non-finite sample at index {i}")));
        }
        Ok(Self { grid, values })
    }

    pub(crate) fn from_parts(grid: Arc<Grid>, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn constant(grid: &Arc<Grid>, c: f64) -> Self {
        Self { grid: grid.clone(), values: vec![c; grid.len()] }
    }

    pub fn zeros(grid: &Arc<Grid>) -> Self {
        Self::constant(grid, 0.0)
    }

    /// Samples `f` at the grid coordinates.
    pub fn from_fn(grid: &Arc<Grid>, f: impl Fn(&[f64]) -> f64) -> Self {
        let dim = grid.dim();
        let values = (0..grid.len())
            .map(|flat| {
                let idx = grid.unflatten(flat);
                let mut x = [0.0; 3];
                for a in 0..dim {
                    x[a] = grid.coordinate(a, idx[a]);
                }
                f(&x[..dim])
            })
            .collect();
        Self { grid: grid.clone(), values }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn check_same_grid(&self, other: &ScalarField) -> Result<()> {
        if Arc::ptr_eq(&self.grid, &other.grid) || self.grid.same_shape(&other.grid) {
            Ok(())
        } else {
            Err(FchError::Shape(format!("{:?} vs {:?}", self.grid, other.grid)))
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> ScalarField {
        Self::from_parts(self.grid.clone(), self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn try_map(&self, f: impl Fn(f64) -> Result<f64>) -> Result<ScalarField> {
        let values = self.values.iter().map(|&v| f(v)).collect::<Result<Vec<_>>>()?;
        Ok(Self::from_parts(self.grid.clone(), values))
    }

    pub fn zip_map(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> Result<ScalarField> {
        self.check_same_grid(other)?;
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Ok(Self::from_parts(self.grid.clone(), values))
    }

    pub fn add(&self, other: &ScalarField) -> Result<ScalarField> {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &ScalarField) -> Result<ScalarField> {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn scale(&self, s: f64) -> ScalarField {
        self.map(|v| s * v)
    }

    /// `self + s * other`.
    pub fn axpy(&self, s: f64, other: &ScalarField) -> Result<ScalarField> {
        self.zip_map(other, |a, b| a + s * b)
    }

    pub fn is_constant(&self) -> bool {
        let first = self.values[0];
        self.values.iter().all(|&v| v == first)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn integral(&self) -> f64 {
        pairwise_sum(&self.values) * self.grid.cell_volume()
    }

    pub fn mean(&self) -> f64 {
        pairwise_sum(&self.values) / self.values.len() as f64
    }

    /// Discrete `L²` inner product.
    pub fn inner(&self, other: &ScalarField) -> Result<f64> {
        self.check_same_grid(other)?;
        let (a, b) = (&self.values, &other.values);
        Ok(pairwise_sum_by(a.len(), |i| a[i] * b[i]) * self.grid.cell_volume())
    }

    pub fn lp_norm(&self, p: LpNorm) -> f64 {
        let v = &self.values;
        let h = self.grid.cell_volume();
        match p {
            LpNorm::L1 => pairwise_sum_by(v.len(), |i| v[i].abs()) * h,
            LpNorm::L2 => (pairwise_sum_by(v.len(), |i| v[i] * v[i]) * h).sqrt(),
            LpNorm::Inf => self.max_abs(),
        }
    }

    pub fn l2_norm(&self) -> f64 {
        self.lp_norm(LpNorm::L2)
    }

    pub fn forward(&self) -> Spectrum {
        Spectrum::forward(self)
    }

    /// `A^power u`, with `A = -Δ` under the grid's boundary conditions.
    pub fn apply_a(&self, power: u32) -> ScalarField {
        let p = power as i32;
        self.forward().with_symbol(|s| s.powi(p)).backward()
    }

    /// `Δu`.
    pub fn laplacian(&self) -> ScalarField {
        self.forward().with_symbol(|s| -s).backward()
    }

    fn check_zero_mean(&self) -> Result<f64> {
        let mean = self.mean();
        let tol = ZERO_MEAN_TOL * self.l2_norm();
        if mean.abs() > tol {
            return Err(FchError::Mean { mean, tol });
        }
        Ok(mean)
    }

    /// `𝒩g`: the zero-mean solution of `A v = g`. Fails unless `g` has
    /// zero mean up to `ZERO_MEAN_TOL * ‖g‖`.
    pub fn inv_a_zero_mean(&self) -> Result<ScalarField> {
        self.check_zero_mean()?;
        Ok(self.forward().with_symbol(inverse_symbol).backward())
    }

    /// `(I + τA)⁻¹ u`.
    pub fn resolvent(&self, tau: f64) -> Result<ScalarField> {
        if !(tau.is_finite() && tau > 0.0) {
            return Err(FchError::Config(format!("resolvent needs tau > 0 (got {tau})")));
        }
        Ok(self.forward().with_symbol(|s| 1.0 / (1.0 + tau * s)).backward())
    }

    /// `‖∇u‖`, evaluated as `⟨Au, u⟩^{1/2}` in spectral space.
    pub fn h1_seminorm(&self) -> f64 {
        self.forward().quadratic_form(|s| s).max(0.0).sqrt()
    }

    /// Discrete `H²` norm `(‖u‖² + ‖Au‖²)^{1/2}`.
    pub fn h2_norm(&self) -> f64 {
        self.forward().quadratic_form(|s| 1.0 + s * s).max(0.0).sqrt()
    }

    /// `‖g‖_{V₀'} = ‖∇𝒩g‖ = ⟨g, 𝒩g⟩^{1/2}`.
    pub fn v0_dual_norm(&self) -> Result<f64> {
        self.check_zero_mean()?;
        Ok(self.forward().quadratic_form(inverse_symbol).max(0.0).sqrt())
    }

    /// Partial derivative along `axis`, computed spectrally along that axis.
    pub fn partial(&self, axis: usize) -> ScalarField {
        Self::from_parts(self.grid.clone(), partial_derivative(self, axis))
    }

    pub fn gradient(&self) -> Vec<ScalarField> {
        (0..self.grid.dim()).map(|a| self.partial(a)).collect()
    }

    /// Pointwise `|∇u|²`.
    pub fn grad_norm_sq_field(&self) -> ScalarField {
        let mut acc = vec![0.0; self.values.len()];
        for axis in 0..self.grid.dim() {
            let d = partial_derivative(self, axis);
            acc.iter_mut().zip(&d).for_each(|(a, v)| *a += v * v);
        }
        Self::from_parts(self.grid.clone(), acc)
    }

    /// Spectral interpolation onto another sampling of the same box.
    pub fn resample(&self, target: &Arc<Grid>) -> Result<ScalarField> {
        Ok(self.forward().resample(target)?.backward())
    }
}

fn inverse_symbol(s: f64) -> f64 {
    if s == 0.0 {
        0.0
    } else {
        1.0 / s
    }
}
