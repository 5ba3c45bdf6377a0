//! Model-level fields and functionals.
//!
//! The chemical potential can be assembled five ways, all equal for smooth
//! fields (with `A = -Δ`):
//!
//! | variant          | `μ - A²u`                                               |
//! |------------------|---------------------------------------------------------|
//! | `Cascade`        | `A f(u) + (f'(u) + η) ω`, `ω = Au + f(u)`                |
//! | `Expanded`       | `Aβ(u) + β'(u) Au + ββ' - (2λ-η) Au + g(u)`             |
//! | `DivergenceForm` | `2Aβ(u) + β''(u)|∇u|² + ββ' - (2λ-η) Au + g(u)`         |
//! | `ChainRule`      | `2β'(u) Au - β''(u)|∇u|² + ββ' - (2λ-η) Au + g(u)`      |
//! | `Coefficient`    | `a(u) Au - ½a'(u)|∇u|² + ββ' - (2λ-η) Au + g(u)`        |
//!
//! On the collocation grid they differ by aliasing only. `Cascade` is the
//! exact gradient of the discrete energy; `DivergenceForm` is the default
//! for time stepping.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{FchError, Result};
use crate::field::ScalarField;
use crate::potential::{eval_a, Nonlinearity, PotentialParams, TruncationLevel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum MuFormulation {
    Cascade,
    Expanded,
    #[default]
    DivergenceForm,
    ChainRule,
    Coefficient,
}

impl MuFormulation {
    pub const ALL: [MuFormulation; 5] = [
        MuFormulation::Cascade,
        MuFormulation::Expanded,
        MuFormulation::DivergenceForm,
        MuFormulation::ChainRule,
        MuFormulation::Coefficient,
    ];
}

/// Evaluation of pointwise nonlinear products.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Dealias {
    /// Directly on the collocation grid.
    #[default]
    Off,
    /// On a 2× zero-padded grid, then truncated back.
    Pad2,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    /// `½‖ω‖²`
    pub willmore: f64,
    /// `η ½‖∇u‖²`
    pub ch_grad: f64,
    /// `η ∫F(u)`
    pub ch_pot: f64,
    pub total: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AprioriDiagnostics {
    pub beta_l2: f64,
    pub grad_beta_l2: f64,
    pub beta_betaprime_l1: f64,
    pub m_integral: f64,
    pub n_integral: f64,
    pub mu_mean: f64,
}

/// `M(r) = r ln^{1/2}(1 + r)`
pub fn m_weight(r: f64) -> f64 {
    r * r.ln_1p().sqrt()
}

/// `N(r) = r ln ln(e⁴ + r)`
pub fn n_weight(r: f64) -> f64 {
    r * (std::f64::consts::E.powi(4) + r).ln().ln()
}

/// Growth rate of the wavenumber-`k` mode for the flow linearized about
/// `u ≡ 0`: `σ(k) = -k² (k² + 1 - λ)(k² + 1 - λ + η)`.
pub fn dispersion_sigma(k: f64, p: &PotentialParams) -> f64 {
    let q = k * k + 1.0 - p.lambda;
    -k * k * q * (q + p.eta)
}

/// Pointwise nonlinear data of a field.
struct Pointwise {
    beta: Vec<f64>,
    beta1: Vec<f64>,
    beta2: Vec<f64>,
    g: Vec<f64>,
}

/// The potential parameters together with the choice of evaluators.
#[derive(Debug, Clone, Copy)]
pub struct Model {
    pub params: PotentialParams,
    pub nonlinearity: Nonlinearity,
    pub dealias: Dealias,
}

impl Model {
    pub fn exact(params: PotentialParams) -> Self {
        Self { params, nonlinearity: Nonlinearity::Exact, dealias: Dealias::Off }
    }

    pub fn truncated(params: PotentialParams, level: TruncationLevel) -> Self {
        Self {
            params,
            nonlinearity: Nonlinearity::for_level(Some(level)),
            dealias: Dealias::Off,
        }
    }

    pub fn with_dealias(mut self, dealias: Dealias) -> Self {
        self.dealias = dealias;
        self
    }

    fn pointwise(&self, u: &ScalarField) -> Result<Pointwise> {
        let n = u.values().len();
        let mut pw = Pointwise {
            beta: Vec::with_capacity(n),
            beta1: Vec::with_capacity(n),
            beta2: Vec::with_capacity(n),
            g: Vec::with_capacity(n),
        };
        for &r in u.values() {
            let (b, b1, b2) = self.nonlinearity.beta(r)?;
            let (g, _) = self.nonlinearity.g(&self.params, r)?;
            pw.beta.push(b);
            pw.beta1.push(b1);
            pw.beta2.push(b2);
            pw.g.push(g);
        }
        Ok(pw)
    }

    fn field(u: &ScalarField, values: Vec<f64>) -> Result<ScalarField> {
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(FchError::Overflow { index });
        }
        ScalarField::new(u.grid().clone(), values)
    }

    /// `ω = -Δu + f(u)`.
    pub fn omega(&self, u: &ScalarField) -> Result<ScalarField> {
        let lambda = self.params.lambda;
        let au = u.apply_a(1);
        let mut out = au.into_values();
        for (o, &r) in out.iter_mut().zip(u.values()) {
            *o += self.nonlinearity.beta(r)?.0 - lambda * r;
        }
        Self::field(u, out)
    }

    /// Chemical potential in the requested formulation.
    pub fn mu(&self, u: &ScalarField, form: MuFormulation) -> Result<ScalarField> {
        self.padded(u, |v| {
            let r = self.remainder_collocated(v, form)?;
            r.add(&v.apply_a(2))
        })
    }

    /// `μ - A²u`: every term of the chemical potential except the
    /// bilaplacian.
    pub fn remainder(&self, u: &ScalarField, form: MuFormulation) -> Result<ScalarField> {
        self.padded(u, |v| self.remainder_collocated(v, form))
    }

    fn padded(
        &self,
        u: &ScalarField,
        eval: impl Fn(&ScalarField) -> Result<ScalarField>,
    ) -> Result<ScalarField> {
        match self.dealias {
            Dealias::Off => eval(u),
            Dealias::Pad2 => {
                let fine = u.grid().refined(2)?;
                let out = eval(&u.resample(&fine)?)?;
                out.resample(u.grid())
            }
        }
    }

    fn remainder_collocated(&self, u: &ScalarField, form: MuFormulation) -> Result<ScalarField> {
        let PotentialParams { lambda, eta } = self.params;
        let pw = self.pointwise(u)?;
        let au = u.apply_a(1);
        let au = au.values();
        let x = u.values();
        let n = x.len();

        if form == MuFormulation::Cascade {
            let fu: Vec<f64> = (0..n).map(|i| pw.beta[i] - lambda * x[i]).collect();
            let afu = Self::field(u, fu.clone())?.apply_a(1);
            let out = (0..n)
                .map(|i| {
                    let omega = au[i] + fu[i];
                    afu.values()[i] + (pw.beta1[i] - lambda + eta) * omega
                })
                .collect();
            return Self::field(u, out);
        }

        let lin = 2.0 * lambda - eta;
        let base = |i: usize| pw.beta[i] * pw.beta1[i] - lin * au[i] + pw.g[i];
        let out: Vec<f64> = match form {
            MuFormulation::Cascade => unreachable!(),
            MuFormulation::Expanded => {
                let ab = Self::field(u, pw.beta.clone())?.apply_a(1);
                (0..n).map(|i| ab.values()[i] + pw.beta1[i] * au[i] + base(i)).collect()
            }
            MuFormulation::DivergenceForm => {
                let ab = Self::field(u, pw.beta.clone())?.apply_a(1);
                let gs = u.grad_norm_sq_field();
                (0..n)
                    .map(|i| 2.0 * ab.values()[i] + pw.beta2[i] * gs.values()[i] + base(i))
                    .collect()
            }
            MuFormulation::ChainRule => {
                let gs = u.grad_norm_sq_field();
                (0..n)
                    .map(|i| 2.0 * pw.beta1[i] * au[i] - pw.beta2[i] * gs.values()[i] + base(i))
                    .collect()
            }
            MuFormulation::Coefficient => {
                let gs = u.grad_norm_sq_field();
                let mut out = Vec::with_capacity(n);
                for i in 0..n {
                    let (a, a1) = match self.nonlinearity {
                        Nonlinearity::Exact => {
                            let (a, a1, _) = eval_a(x[i])?;
                            (a, a1)
                        }
                        // a = 2β' by definition; the extension carries it along
                        Nonlinearity::Extended(_) => (2.0 * pw.beta1[i], 2.0 * pw.beta2[i]),
                    };
                    out.push(a * au[i] - 0.5 * a1 * gs.values()[i] + base(i));
                }
                out
            }
        };
        Self::field(u, out)
    }

    /// `ℰ(u) = ∫ ½|ω|² + η(½|∇u|² + F(u))`.
    pub fn energy(&self, u: &ScalarField) -> Result<EnergyBreakdown> {
        let PotentialParams { lambda, eta } = self.params;
        let exact = matches!(self.nonlinearity, Nonlinearity::Exact);
        let spec = u.forward();
        let au = spec.with_symbol(|s| s).backward();
        let mut omega = au.into_values();
        let mut pot = Vec::with_capacity(omega.len());
        for (o, &r) in omega.iter_mut().zip(u.values()) {
            pot.push(self.nonlinearity.big_f(&self.params, r)?);
            if exact && r.abs() == 1.0 {
                *o = f64::INFINITY;
            } else {
                *o += self.nonlinearity.beta(r)?.0 - lambda * r;
            }
        }
        let h = u.grid().cell_volume();
        let willmore = 0.5 * crate::sum::pairwise_sum_by(omega.len(), |i| omega[i] * omega[i]) * h;
        let ch_grad = eta * 0.5 * spec.quadratic_form(|s| s);
        let ch_pot = eta * crate::sum::pairwise_sum(&pot) * h;
        Ok(EnergyBreakdown { willmore, ch_grad, ch_pot, total: willmore + ch_grad + ch_pot })
    }

    /// `μ̄ = |Ω|⁻¹ ∫ β''(u)|∇u|² + β(u)β'(u) + g(u)`.
    pub fn mu_mean(&self, u: &ScalarField) -> Result<f64> {
        let pw = self.pointwise(u)?;
        let gs = u.grad_norm_sq_field();
        let vals: Vec<f64> = (0..pw.beta.len())
            .map(|i| pw.beta2[i] * gs.values()[i] + pw.beta[i] * pw.beta1[i] + pw.g[i])
            .collect();
        Ok(crate::sum::pairwise_sum(&vals) / vals.len() as f64)
    }

    pub fn apriori_diagnostics(&self, u: &ScalarField) -> Result<AprioriDiagnostics> {
        let pw = self.pointwise(u)?;
        let gs = u.grad_norm_sq_field();
        let beta = Self::field(u, pw.beta.clone())?;
        let n = pw.beta.len();
        let b = |i: usize| (pw.beta[i] * pw.beta1[i]).abs();
        let a = |i: usize| (pw.beta2[i] * gs.values()[i]).abs();
        let h = u.grid().cell_volume();
        use crate::sum::pairwise_sum_by as sum;
        let mu_sum = sum(n, |i| pw.beta2[i] * gs.values()[i] + pw.beta[i] * pw.beta1[i] + pw.g[i]);
        Ok(AprioriDiagnostics {
            beta_l2: beta.l2_norm(),
            grad_beta_l2: beta.h1_seminorm(),
            beta_betaprime_l1: sum(n, b) * h,
            m_integral: sum(n, |i| m_weight(b(i))) * h,
            n_integral: sum(n, |i| n_weight(a(i))) * h,
            mu_mean: mu_sum / n as f64,
        })
    }
}

/// Fréchet derivative of the divergence-form remainder `μ - A²u` at a
/// frozen state:
/// `w ↦ 2A(β'w) + β'''|∇u|²w + 2β''∇u·∇w + (β'² + ββ'' + g' - (2λ-η)A) w`.
#[derive(Debug, Clone)]
pub struct RemainderJacobian {
    lin: f64,
    // evaluated on the (possibly padded) collocation grid
    beta1: ScalarField,
    diag: Vec<f64>,
    cross: Vec<Vec<f64>>,
    coarse: Option<Arc<crate::grid::Grid>>,
}

impl Model {
    /// Largest `2β'(u)` and largest `|β'''|∇u|² + β'² + ββ'' + g'|` over
    /// the samples: the frozen coefficients of the second- and zeroth-order
    /// parts of the linearized remainder.
    pub fn frozen_bounds(&self, u: &ScalarField) -> Result<(f64, f64)> {
        let gs = u.grad_norm_sq_field();
        let (mut top, mut zeroth) = (0.0f64, 0.0f64);
        for (&r, &q) in u.values().iter().zip(gs.values()) {
            let (b, b1, b2) = self.nonlinearity.beta(r)?;
            let b3 = self.nonlinearity.beta3(r)?;
            let g1 = self.nonlinearity.g(&self.params, r)?.1;
            top = top.max(2.0 * b1);
            zeroth = zeroth.max((b3 * q + b1 * b1 + b * b2 + g1).abs());
        }
        Ok((top, zeroth))
    }

    pub fn remainder_jacobian(&self, u: &ScalarField) -> Result<RemainderJacobian> {
        let (u, coarse) = match self.dealias {
            Dealias::Off => (u.clone(), None),
            Dealias::Pad2 => (u.resample(&u.grid().refined(2)?)?, Some(u.grid().clone())),
        };
        let pw = self.pointwise(&u)?;
        let grad = u.gradient();
        let gs = u.grad_norm_sq_field();
        let n = pw.beta.len();
        let mut diag = Vec::with_capacity(n);
        for (i, &r) in u.values().iter().enumerate() {
            let b3 = self.nonlinearity.beta3(r)?;
            let g1 = self.nonlinearity.g(&self.params, r)?.1;
            diag.push(
                b3 * gs.values()[i] + pw.beta1[i] * pw.beta1[i] + pw.beta[i] * pw.beta2[i] + g1,
            );
        }
        let cross = grad
            .iter()
            .map(|d| d.values().iter().zip(&pw.beta2).map(|(d, b2)| 2.0 * b2 * d).collect())
            .collect();
        Ok(RemainderJacobian {
            lin: 2.0 * self.params.lambda - self.params.eta,
            beta1: Self::field(&u, pw.beta1)?,
            diag,
            cross,
            coarse,
        })
    }
}

impl RemainderJacobian {
    /// Spatial means of the second- and zeroth-order coefficients, the
    /// constant-coefficient part used for preconditioning.
    pub fn mean_coefficients(&self) -> (f64, f64) {
        let n = self.diag.len() as f64;
        let c2 = 2.0 * self.beta1.mean() - self.lin;
        let c0 = crate::sum::pairwise_sum(&self.diag) / n;
        (c2, c0)
    }

    pub fn apply(&self, w: &ScalarField) -> Result<ScalarField> {
        let w = match &self.coarse {
            None => w.clone(),
            Some(_) => w.resample(self.beta1.grid())?,
        };
        let bw = self.beta1.zip_map(&w, |b, x| b * x)?;
        let abw = bw.apply_a(1);
        let aw = w.apply_a(1);
        let grad_w = w.gradient();
        let out: Vec<f64> = (0..self.diag.len())
            .map(|i| {
                let mut v = 2.0 * abw.values()[i] + self.diag[i] * w.values()[i] - self.lin * aw.values()[i];
                for (c, g) in self.cross.iter().zip(&grad_w) {
                    v += c[i] * g.values()[i];
                }
                v
            })
            .collect();
        let out = Model::field(&w, out)?;
        match &self.coarse {
            None => Ok(out),
            Some(g) => out.resample(g),
        }
    }
}

/// `J(u) = ∫ |∇ arcsin u|²`.
pub fn arcsin_functional(u: &ScalarField) -> Result<f64> {
    let w = u.try_map(|r| {
        if r.abs() <= 1.0 {
            Ok(r.asin())
        } else {
            Err(FchError::Domain { value: r, interval: "[-1, 1]" })
        }
    })?;
    let integrand = w.grad_norm_sq_field();
    if let Some(index) = integrand.values().iter().position(|v| !(v.is_finite() && *v <= 1e300)) {
        return Err(FchError::Overflow { index });
    }
    Ok(integrand.integral())
}

/// Gâteaux derivative of `J` at `u` in direction `phi`:
/// `∫ a(u)∇u·∇φ + ½ a'(u)|∇u|² φ`.
pub fn arcsin_gateaux(u: &ScalarField, phi: &ScalarField) -> Result<f64> {
    u.check_same_grid(phi)?;
    let grad_u = u.gradient();
    let grad_phi = phi.gradient();
    let n = u.values().len();
    let mut vals = Vec::with_capacity(n);
    for i in 0..n {
        let (a, a1, _) = eval_a(u.values()[i])?;
        let mut dot = 0.0;
        let mut sq = 0.0;
        for (gu, gp) in grad_u.iter().zip(&grad_phi) {
            dot += gu.values()[i] * gp.values()[i];
            sq += gu.values()[i] * gu.values()[i];
        }
        vals.push(a * dot + 0.5 * a1 * sq * phi.values()[i]);
    }
    Ok(crate::sum::pairwise_sum(&vals) * u.grid().cell_volume())
}
