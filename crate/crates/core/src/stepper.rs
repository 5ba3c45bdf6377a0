//! Time integration of `∂ₜu = Δμ`.
//!
//! Two first-order schemes share the divergence-form remainder
//! `R(u) = μ(u) - A²u`:
//!
//! * a stabilized IMEX step, diagonal in spectral space,
//!   `(1 + dt(a³ + s1 a² + s2 a)) û⁺ = (1 + dt(s1 a² + s2 a)) û - dt a R̂(u)`;
//! * backward Euler solved by Newton-GMRES with the IMEX operator as
//!   preconditioner.
//!
//! `advance` wraps either with energy-based step rejection.

use serde::{Deserialize, Serialize};

use crate::error::{FchError, Result};
use crate::field::ScalarField;
use crate::krylov::{gmres, GmresOptions};
use crate::model::{Dealias, EnergyBreakdown, Model, MuFormulation};
use crate::potential::{PotentialParams, TruncationLevel};

/// The formulation the schemes are built on.
pub const STEP_FORMULATION: MuFormulation = MuFormulation::DivergenceForm;

/// Newton iteration counts at or below this let the step size grow.
const FAST_NEWTON_ITERS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    #[default]
    ImexStabilized,
    ImplicitNewton,
}

/// How the stabilization constants `s1`, `s2` are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Stabilization {
    /// Recomputed every step from the current samples: `s1 = 2 max β'(u) +
    /// |2λ - η|`, and `s2` the largest magnitude of the zeroth-order
    /// coefficient of the linearized remainder (see `Model::frozen_bounds`).
    #[default]
    Frozen,
    /// `s1 = 2 max β'` over the whole admissible range (`|r| ≤ bound -
    /// guard_eps`), `s2 = |2λ - η|`. Very large near the singular bound.
    AdmissibleRange,
    Fixed { s1: f64, s2: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub scheme: Scheme,
    pub dt0: f64,
    pub dt_min: f64,
    pub dt_max: f64,
    pub stabilization: Stabilization,
    pub energy_tol: f64,
    pub growth_factor: f64,
    pub newton_tol: f64,
    pub newton_max_iters: usize,
    pub guard_eps: f64,
    pub truncation: Option<TruncationLevel>,
    pub dealias: Dealias,
    /// Stop after this many accepted steps even if `t_end` is not reached.
    pub max_steps: Option<u64>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            scheme: Scheme::ImexStabilized,
            dt0: 1e-5,
            dt_min: 1e-12,
            dt_max: 1e-2,
            stabilization: Stabilization::Frozen,
            energy_tol: 1e-10,
            growth_factor: 1.1,
            newton_tol: 1e-9,
            newton_max_iters: 30,
            guard_eps: 1e-4,
            truncation: None,
            dealias: Dealias::Off,
            max_steps: None,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(FchError::Config(m));
        for (name, v) in [("dt0", self.dt0), ("dt_min", self.dt_min), ("dt_max", self.dt_max)] {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("{name} must be positive, got {v}"));
            }
        }
        if !(self.dt_min <= self.dt0 && self.dt0 <= self.dt_max) {
            return bad(format!(
                "need dt_min <= dt0 <= dt_max, got {} / {} / {}",
                self.dt_min, self.dt0, self.dt_max
            ));
        }
        if let Stabilization::Fixed { s1, s2 } = self.stabilization {
            if !(s1.is_finite() && s1 >= 0.0 && s2.is_finite() && s2 >= 0.0) {
                return bad(format!("stabilization constants must be nonnegative, got {s1}, {s2}"));
            }
        }
        if !(self.energy_tol.is_finite() && self.energy_tol >= 0.0) {
            return bad(format!("energy_tol must be nonnegative, got {}", self.energy_tol));
        }
        if !(self.growth_factor.is_finite() && self.growth_factor > 1.0) {
            return bad(format!("growth_factor must exceed 1, got {}", self.growth_factor));
        }
        if !(self.newton_tol.is_finite() && self.newton_tol > 0.0) {
            return bad(format!("newton_tol must be positive, got {}", self.newton_tol));
        }
        if self.newton_max_iters == 0 {
            return bad("newton_max_iters must be positive".into());
        }
        if !(self.guard_eps > 0.0 && self.guard_eps < 0.5) {
            return bad(format!("guard_eps must lie in (0, 0.5), got {}", self.guard_eps));
        }
        if let Some(lvl) = self.truncation {
            if self.guard_eps >= 1.0 - lvl.clamp_bound() {
                return bad(format!(
                    "guard_eps {} must be below 1/n = {} for truncation level {}",
                    self.guard_eps,
                    1.0 - lvl.clamp_bound(),
                    lvl.n()
                ));
            }
        }
        if self.max_steps == Some(0) {
            return bad("max_steps must be positive".into());
        }
        Ok(())
    }

    pub fn model(&self, params: PotentialParams) -> Model {
        let m = match self.truncation {
            Some(lvl) => Model::truncated(params, lvl),
            None => Model::exact(params),
        };
        m.with_dealias(self.dealias)
    }

    /// Largest `|u|` the Newton iterate may take.
    pub fn guard_bound(&self) -> f64 {
        match self.truncation {
            Some(lvl) => lvl.clamp_bound() - self.guard_eps,
            None => 1.0 - self.guard_eps,
        }
    }

    fn stabilization_for(&self, model: &Model, u: &ScalarField) -> Result<(f64, f64)> {
        let PotentialParams { lambda, eta } = model.params;
        let s2 = (2.0 * lambda - eta).abs();
        Ok(match self.stabilization {
            Stabilization::Frozen => {
                let (top, zeroth) = model.frozen_bounds(u)?;
                (top + s2, zeroth)
            }
            Stabilization::AdmissibleRange => {
                (model.nonlinearity.max_two_beta_prime(self.guard_bound())?, s2)
            }
            Stabilization::Fixed { s1, s2 } => (s1, s2),
        })
    }
}

#[derive(Debug, Clone)]
pub struct StepResult {
    pub field: ScalarField,
    pub dt_used: f64,
    pub accepted: bool,
    /// Newton iterations (zero for the IMEX scheme).
    pub inner_iters: usize,
    pub energy_before: f64,
    /// `+∞` when the candidate left the admissible set.
    pub energy_after: f64,
    pub breakdown_after: Option<EnergyBreakdown>,
}

/// Energy of a candidate state; `None` if it is not admissible.
fn candidate_energy(model: &Model, v: &ScalarField) -> Result<Option<EnergyBreakdown>> {
    match model.energy(v) {
        Ok(e) if e.total.is_finite() => Ok(Some(e)),
        Ok(_) | Err(FchError::Domain { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

fn check_dt(dt: f64) -> Result<()> {
    if dt.is_finite() && dt > 0.0 {
        Ok(())
    } else {
        Err(FchError::Config(format!("time step must be positive, got {dt}")))
    }
}

fn imex_update(u: &ScalarField, dt: f64, model: &Model, cfg: &SolverConfig) -> Result<ScalarField> {
    if u.is_constant() {
        return Ok(u.clone());
    }
    let (s1, s2) = cfg.stabilization_for(model, u)?;
    let r = model.remainder(u, STEP_FORMULATION)?;
    let uh = u.forward();
    let rh = r.forward();
    let next = uh.combine(&rh, |a| {
        let stab = dt * (s1 * a * a + s2 * a);
        let den = 1.0 + dt * a * a * a + stab;
        ((1.0 + stab) / den, -dt * a / den)
    })?;
    Ok(next.backward())
}

fn newton_update(
    u: &ScalarField,
    dt: f64,
    model: &Model,
    cfg: &SolverConfig,
) -> Result<(ScalarField, usize)> {
    if u.is_constant() {
        return Ok((u.clone(), 0));
    }
    let bound = cfg.guard_bound();
    let grid = u.grid().clone();
    let tol = cfg.newton_tol * u.l2_norm();

    let residual = |v: &ScalarField| -> Result<ScalarField> {
        let r = model.remainder(v, STEP_FORMULATION)?;
        let vh = v.forward();
        let g = vh.combine(&r.forward(), |a| (1.0 + dt * a * a * a, dt * a))?.backward();
        g.sub(u)
    };
    // averaged Jacobian coefficients, clipped so the symbol stays >= 1
    let precond = |x: &[f64], c2: f64, c0: f64| -> Result<Vec<f64>> {
        let f = ScalarField::new(grid.clone(), x.to_vec())?;
        let mut s = f.forward();
        s.apply_symbol(|a| 1.0 / (1.0 + dt * (a * a * a + c2.max(0.0) * a * a + c0.max(0.0) * a)));
        Ok(s.backward().into_values())
    };

    let mut v = imex_update(u, dt, model, cfg)?;
    if v.max_abs() > bound {
        v = u.clone();
    }
    let mut last = f64::INFINITY;
    for it in 0..=cfg.newton_max_iters {
        let g = residual(&v)?;
        let res = g.l2_norm();
        // stagnation just above tol is the roundoff floor of dt*A*mu, not divergence
        if res <= tol || (res <= 100.0 * tol && res > 0.5 * last) {
            return Ok((v, it));
        }
        last = res;
        if it == cfg.newton_max_iters {
            break;
        }
        let jac = model.remainder_jacobian(&v)?;
        let (c2, c0) = jac.mean_coefficients();
        let apply = |x: &[f64]| -> Result<Vec<f64>> {
            let w = ScalarField::new(grid.clone(), x.to_vec())?;
            let jw = jac.apply(&w)?;
            let out = w.forward().combine(&jw.forward(), |a| (1.0 + dt * a * a * a, dt * a))?;
            Ok(out.backward().into_values())
        };
        let rhs: Vec<f64> = g.values().iter().map(|x| -x).collect();
        let sol = gmres(apply, |x| precond(x, c2, c0), &rhs, GmresOptions { rtol: 1e-6, restart: 40, max_iters: 200 })?;
        let delta = ScalarField::new(grid.clone(), sol.x)?;
        // the update is mean-free in exact arithmetic; keep it so
        let delta = delta.map({
            let m = delta.mean();
            move |x| x - m
        });

        let mut theta = 1.0;
        loop {
            let trial = v.axpy(theta, &delta)?;
            if trial.max_abs() <= bound {
                v = trial;
                break;
            }
            theta *= 0.5;
            if theta < 1e-10 {
                return Err(FchError::GuardViolation { bound });
            }
        }
    }
    Err(FchError::NewtonDivergence { iters: cfg.newton_max_iters, residual: last })
}

fn finish(
    model: &Model,
    cfg: &SolverConfig,
    dt: f64,
    energy_before: f64,
    field: ScalarField,
    inner_iters: usize,
) -> Result<StepResult> {
    let breakdown_after = candidate_energy(model, &field)?;
    let energy_after = breakdown_after.map_or(f64::INFINITY, |e| e.total);
    Ok(StepResult {
        field,
        dt_used: dt,
        accepted: energy_after <= energy_before + cfg.energy_tol,
        inner_iters,
        energy_before,
        energy_after,
        breakdown_after,
    })
}

pub(crate) fn step_with(
    u: &ScalarField,
    dt: f64,
    model: &Model,
    cfg: &SolverConfig,
    energy_before: f64,
) -> Result<StepResult> {
    check_dt(dt)?;
    let (field, iters) = match cfg.scheme {
        Scheme::ImexStabilized => (imex_update(u, dt, model, cfg)?, 0),
        Scheme::ImplicitNewton => newton_update(u, dt, model, cfg)?,
    };
    finish(model, cfg, dt, energy_before, field, iters)
}

/// One stabilized IMEX step.
pub fn step_imex(u: &ScalarField, dt: f64, p: &PotentialParams, cfg: &SolverConfig) -> Result<StepResult> {
    let cfg = SolverConfig { scheme: Scheme::ImexStabilized, ..*cfg };
    let model = cfg.model(*p);
    let e = model.energy(u)?.total;
    step_with(u, dt, &model, &cfg, e)
}

/// One backward Euler step solved by Newton-GMRES.
pub fn step_implicit(u: &ScalarField, dt: f64, p: &PotentialParams, cfg: &SolverConfig) -> Result<StepResult> {
    let cfg = SolverConfig { scheme: Scheme::ImplicitNewton, ..*cfg };
    let model = cfg.model(*p);
    let e = model.energy(u)?.total;
    step_with(u, dt, &model, &cfg, e)
}

/// State handed to an observer after every accepted step, and once for the
/// initial data with `dt = 0`.
#[derive(Debug, Clone, Copy)]
pub struct StepInfo<'a> {
    pub u: &'a ScalarField,
    pub t: f64,
    pub dt: f64,
    /// Rejected attempts since the previous accepted step.
    pub rejections: u64,
    pub energy: EnergyBreakdown,
    pub model: &'a Model,
}

pub trait StepObserver {
    fn observe(&mut self, info: &StepInfo<'_>) -> Result<()>;
}

/// Discards everything.
#[derive(Debug, Default, Clone, Copy)]
pub struct NoObserver;

impl StepObserver for NoObserver {
    fn observe(&mut self, _: &StepInfo<'_>) -> Result<()> {
        Ok(())
    }
}

impl<T: StepObserver + ?Sized> StepObserver for &mut T {
    fn observe(&mut self, info: &StepInfo<'_>) -> Result<()> {
        (**self).observe(info)
    }
}

#[derive(Debug, Clone)]
pub struct AdvanceSummary {
    pub field: ScalarField,
    pub t: f64,
    pub steps: u64,
    pub rejections: u64,
    /// Step size the controller would try next.
    pub next_dt: f64,
    pub energy: EnergyBreakdown,
}

/// Integrates from `t = 0` to `t_end` (or until `cfg.max_steps` accepted
/// steps) with energy-based rejection.
pub fn advance(
    u0: &ScalarField,
    t_end: f64,
    p: &PotentialParams,
    cfg: &SolverConfig,
    mut observer: impl StepObserver,
) -> Result<AdvanceSummary> {
    cfg.validate()?;
    if !(t_end.is_finite() && t_end > 0.0) {
        return Err(FchError::Config(format!("t_end must be positive, got {t_end}")));
    }
    let model = cfg.model(*p);
    let mut energy = model.energy(u0)?;
    if !energy.total.is_finite() {
        let value = if u0.max() >= 1.0 { u0.max() } else { u0.min() };
        return Err(FchError::Domain { value, interval: "(-1, 1)" });
    }
    observer.observe(&StepInfo { u: u0, t: 0.0, dt: 0.0, rejections: 0, energy, model: &model })?;

    let mut u = u0.clone();
    let (mut t, mut dt) = (0.0, cfg.dt0);
    let (mut steps, mut rejections, mut pending) = (0u64, 0u64, 0u64);
    while t < t_end && cfg.max_steps.is_none_or(|m| steps < m) {
        let last = t + dt >= t_end;
        let h = if last { t_end - t } else { dt };
        // a failed nonlinear solve is handled like an energy rejection
        let res = match step_with(&u, h, &model, cfg, energy.total) {
            Err(FchError::NewtonDivergence { .. }) | Err(FchError::GuardViolation { .. }) => None,
            other => Some(other?),
        };
        if !res.as_ref().is_some_and(|r| r.accepted) {
            rejections += 1;
            pending += 1;
            if h <= cfg.dt_min {
                return Err(FchError::StepFloor { t, dt_min: cfg.dt_min });
            }
            dt = (0.5 * h).max(cfg.dt_min);
            continue;
        }
        let res = res.expect("accepted");
        t = if last { t_end } else { t + h };
        steps += 1;
        u = res.field;
        energy = res.breakdown_after.expect("accepted steps have finite energy");
        observer.observe(&StepInfo { u: &u, t, dt: h, rejections: pending, energy, model: &model })?;
        pending = 0;
        if !last && res.inner_iters <= FAST_NEWTON_ITERS {
            dt = (dt * cfg.growth_factor).min(cfg.dt_max);
        }
    }
    Ok(AdvanceSummary { field: u, t, steps, rejections, next_dt: dt, energy })
}
