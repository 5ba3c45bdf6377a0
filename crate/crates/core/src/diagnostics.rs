//! Run ledger and the experiment drivers built on it.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{FchError, Result};
use crate::field::ScalarField;
use crate::initdata::regularize_initial;
use crate::model::{AprioriDiagnostics, EnergyBreakdown, Model};
use crate::potential::{PotentialParams, TruncationLevel};
use crate::stepper::{advance, step_with, SolverConfig, StepInfo, StepObserver, STEP_FORMULATION};

pub const LEDGER_HEADER: &str = "t,dt,mass,E_total,E_willmore,E_ch_grad,E_ch_pot,grad_mu_sq,\
min_u,max_u,delta_sep,beta_l2,grad_beta_l2,betabp_l1,M_int,N_int,mu_mean,rejections";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LedgerRow {
    pub t: f64,
    pub dt: f64,
    /// Spatial mean of `u`.
    pub mass: f64,
    pub energy: EnergyBreakdown,
    /// `‖∇μ‖²`.
    pub grad_mu_sq: f64,
    pub min_u: f64,
    pub max_u: f64,
    /// `1 - ‖u‖∞`.
    pub delta_sep: f64,
    pub apriori: AprioriDiagnostics,
    pub rejections: u64,
}

impl LedgerRow {
    fn csv_line(&self) -> String {
        let e = &self.energy;
        let a = &self.apriori;
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.t,
            self.dt,
            self.mass,
            e.total,
            e.willmore,
            e.ch_grad,
            e.ch_pot,
            self.grad_mu_sq,
            self.min_u,
            self.max_u,
            self.delta_sep,
            a.beta_l2,
            a.grad_beta_l2,
            a.beta_betaprime_l1,
            a.m_integral,
            a.n_integral,
            a.mu_mean,
            self.rejections
        )
    }
}

/// Computes every ledger column for `u`. `energy` may be passed in when the
/// caller already has it.
pub fn record(
    u: &ScalarField,
    t: f64,
    dt: f64,
    model: &Model,
    energy: Option<EnergyBreakdown>,
    rejections: u64,
) -> Result<LedgerRow> {
    let energy = match energy {
        Some(e) => e,
        None => model.energy(u)?,
    };
    let mu = model.mu(u, STEP_FORMULATION)?;
    let grad_mu = mu.h1_seminorm();
    let (min_u, max_u) = (u.min(), u.max());
    Ok(LedgerRow {
        t,
        dt,
        mass: u.mean(),
        energy,
        grad_mu_sq: grad_mu * grad_mu,
        min_u,
        max_u,
        delta_sep: 1.0 - min_u.abs().max(max_u.abs()),
        apriori: model.apriori_diagnostics(u)?,
        rejections,
    })
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct RunLedger {
    pub dim: Option<usize>,
    pub rows: Vec<LedgerRow>,
}

impl RunLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, row: LedgerRow) -> Result<()> {
        if let Some(last) = self.rows.last() {
            if !(row.t > last.t) {
                return Err(FchError::Range(format!("time {} does not follow {}", row.t, last.t)));
            }
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn write_csv(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "{LEDGER_HEADER}")?;
        for r in &self.rows {
            writeln!(w, "{}", r.csv_line())?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ascii")
    }

    /// Largest deviation of the mass column from its first entry.
    pub fn mass_drift(&self) -> f64 {
        let Some(first) = self.rows.first() else { return 0.0 };
        self.rows.iter().map(|r| (r.mass - first.mass).abs()).fold(0.0, f64::max)
    }

    /// Largest one-step energy increase (zero if the energy never rises).
    pub fn max_energy_increase(&self) -> f64 {
        self.rows
            .windows(2)
            .map(|w| w[1].energy.total - w[0].energy.total)
            .fold(0.0, f64::max)
    }

    fn range(&self, t1: f64, t2: f64) -> Result<(usize, usize)> {
        let (Some(first), Some(last)) = (self.rows.first(), self.rows.last()) else {
            return Err(FchError::Range("empty ledger".into()));
        };
        if !(t1 < t2 && t1 >= first.t && t2 <= last.t) {
            return Err(FchError::Range(format!(
                "[{t1}, {t2}] is not an interval inside [{}, {}]",
                first.t, last.t
            )));
        }
        // last row at or before t1, first row at or after t2
        let i1 = self.rows.iter().rposition(|r| r.t <= t1).expect("t1 >= first.t");
        let i2 = self.rows.iter().position(|r| r.t >= t2).expect("t2 <= last.t");
        Ok((i1, i2))
    }

    /// `|ℰ(t₂) - ℰ(t₁) + Σ dt ‖∇μ‖²|` over the rows in `(t₁, t₂]`, with
    /// `t₁` rounded down and `t₂` rounded up to recorded times.
    pub fn energy_identity_residual(&self, t1: f64, t2: f64) -> Result<f64> {
        let (i1, i2) = self.range(t1, t2)?;
        let dissipated: Vec<f64> = self.rows[i1 + 1..=i2].iter().map(|r| r.dt * r.grad_mu_sq).collect();
        let d = crate::sum::pairwise_sum(&dissipated);
        Ok((self.rows[i2].energy.total - self.rows[i1].energy.total + d).abs())
    }

    pub fn separation_report(&self, tau: f64) -> Result<SeparationReport> {
        let last = self.rows.last().ok_or_else(|| FchError::Range("empty ledger".into()))?;
        if !(tau >= self.rows[0].t && tau <= last.t) {
            return Err(FchError::Range(format!("tau = {tau} outside [{}, {}]", self.rows[0].t, last.t)));
        }
        let delta_min = self
            .rows
            .iter()
            .filter(|r| r.t >= tau)
            .map(|r| r.delta_sep)
            .fold(f64::INFINITY, f64::min);
        let dim = self.dim.unwrap_or(1);
        Ok(SeparationReport { tau, delta_min, attained: delta_min > 0.0, dim, guaranteed: dim <= 2 })
    }
}

impl StepObserver for RunLedger {
    fn observe(&mut self, i: &StepInfo<'_>) -> Result<()> {
        self.dim = Some(i.u.grid().dim());
        let row = record(i.u, i.t, i.dt, i.model, Some(i.energy), i.rejections)?;
        self.push(row)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeparationReport {
    pub tau: f64,
    pub delta_min: f64,
    pub attained: bool,
    pub dim: usize,
    /// Separation is a theorem for one and two space dimensions only.
    pub guaranteed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CdepReport {
    pub times: Vec<f64>,
    pub dual_distance: Vec<f64>,
    pub fitted_c: f64,
    /// Samples with `t` below this are left out of the fit.
    pub fit_from: f64,
    pub envelope_ok: bool,
}

/// Least-squares `C` in `ln(d²/d₀²) ≈ C t` (no intercept) over `t ≥ t_min`.
pub fn fit_rate(times: &[f64], dist: &[f64], t_min: f64) -> f64 {
    let d0 = dist[0];
    let (mut num, mut den) = (0.0, 0.0);
    for (&t, &d) in times.iter().zip(dist) {
        if t >= t_min && t > 0.0 {
            let y = 2.0 * (d / d0).ln();
            num += t * y;
            den += t * t;
        }
    }
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

/// `d(t)² ≤ d(0)² exp((C + |C|/100) t)` at every sample.
pub fn envelope_holds(times: &[f64], dist: &[f64], c: f64) -> bool {
    let d0 = dist[0];
    let rate = c + 0.01 * c.abs();
    times
        .iter()
        .zip(dist)
        .all(|(&t, &d)| d * d <= d0 * d0 * (rate * t).exp() * (1.0 + 1e-12))
}

fn dual_distance(a: &ScalarField, b: &ScalarField) -> Result<f64> {
    let d = a.sub(b)?;
    let m = d.mean();
    d.map(|v| v - m).v0_dual_norm()
}

/// Runs both trajectories with one shared step-size sequence; a step is
/// kept only if both halves are accepted.
pub fn cdep_experiment(
    u01: &ScalarField,
    u02: &ScalarField,
    p: &PotentialParams,
    cfg: &SolverConfig,
    t_end: f64,
) -> Result<CdepReport> {
    cfg.validate()?;
    u01.check_same_grid(u02)?;
    let diff = (u01.mean() - u02.mean()).abs();
    if diff > 1e-12 {
        return Err(FchError::MeanMismatch { diff });
    }
    if u01 == u02 {
        return Err(FchError::IdenticalInputs);
    }
    if !(t_end.is_finite() && t_end > 0.0) {
        return Err(FchError::Config(format!("t_end must be positive, got {t_end}")));
    }
    let model = cfg.model(*p);
    let (mut u1, mut u2) = (u01.clone(), u02.clone());
    let (mut e1, mut e2) = (model.energy(&u1)?.total, model.energy(&u2)?.total);
    let mut times = vec![0.0];
    let mut dist = vec![dual_distance(&u1, &u2)?];
    let (mut t, mut dt) = (0.0, cfg.dt0);
    let mut steps = 0u64;
    while t < t_end && cfg.max_steps.is_none_or(|m| steps < m) {
        let last = t + dt >= t_end;
        let h = if last { t_end - t } else { dt };
        let r1 = step_with(&u1, h, &model, cfg, e1)?;
        let r2 = step_with(&u2, h, &model, cfg, e2)?;
        if !(r1.accepted && r2.accepted) {
            if h <= cfg.dt_min {
                return Err(FchError::StepFloor { t, dt_min: cfg.dt_min });
            }
            dt = (0.5 * h).max(cfg.dt_min);
            continue;
        }
        t = if last { t_end } else { t + h };
        steps += 1;
        (u1, e1) = (r1.field, r1.energy_after);
        (u2, e2) = (r2.field, r2.energy_after);
        times.push(t);
        dist.push(dual_distance(&u1, &u2)?);
        if !last && r1.inner_iters.max(r2.inner_iters) <= 4 {
            dt = (dt * cfg.growth_factor).min(cfg.dt_max);
        }
    }
    let fit_from = 5.0 * cfg.dt0;
    let fitted_c = fit_rate(&times, &dist, fit_from);
    let envelope_ok = envelope_holds(&times, &dist, fitted_c);
    Ok(CdepReport { times, dual_distance: dist, fitted_c, fit_from, envelope_ok })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationRow {
    pub n: u32,
    /// `‖u⁽ⁿ⁾ - u⁽²ⁿ⁾‖` at `t_end`.
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruncationReport {
    pub t_end: f64,
    pub rows: Vec<TruncationRow>,
    pub decreasing: bool,
}

/// Solves the truncated problem from the regularized data for every level
/// `n` in `levels` and for `2n`, all in parallel, and compares each pair at
/// `t_end`.
pub fn truncation_convergence(
    u0: &ScalarField,
    p: &PotentialParams,
    cfg: &SolverConfig,
    levels: &[u32],
    t_end: f64,
) -> Result<TruncationReport> {
    if levels.is_empty() || levels.windows(2).any(|w| w[1] <= w[0]) {
        return Err(FchError::Config("levels must be nonempty and strictly ascending".into()));
    }
    let mut all: Vec<u32> = levels.iter().flat_map(|&n| [n, 2 * n]).collect();
    all.sort_unstable();
    all.dedup();
    let results: Vec<Result<ScalarField>> = std::thread::scope(|s| {
        let handles: Vec<_> = all
            .iter()
            .map(|&n| {
                s.spawn(move || -> Result<ScalarField> {
                    let lvl = TruncationLevel::new(n)?;
                    let cfg = SolverConfig { truncation: Some(lvl), ..*cfg };
                    let start = regularize_initial(u0, lvl)?;
                    Ok(advance(&start, t_end, p, &cfg, crate::stepper::NoObserver)?.field)
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("solver thread panicked")).collect()
    });
    let mut finals = std::collections::HashMap::new();
    for (n, r) in all.iter().zip(results) {
        finals.insert(*n, r?);
    }
    let rows: Vec<TruncationRow> = levels
        .iter()
        .map(|&n| {
            let d = finals[&n].sub(&finals[&(2 * n)])?.l2_norm();
            Ok(TruncationRow { n, distance: d })
        })
        .collect::<Result<_>>()?;
    let decreasing = rows.windows(2).all(|w| w[1].distance < w[0].distance);
    Ok(TruncationReport { t_end, rows, decreasing })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DispersionRow {
    pub mode: u32,
    pub wavenumber: f64,
    pub sigma_closed: f64,
    pub sigma_measured: f64,
    pub rel_error: f64,
}

/// Projection of `u` onto `cos(k x₀)`.
fn cos_coefficient(u: &ScalarField, k: f64) -> f64 {
    let g = u.grid();
    let (mut num, mut den) = (Vec::with_capacity(g.len()), Vec::with_capacity(g.len()));
    for (flat, v) in u.values().iter().enumerate() {
        let c = (k * g.coordinate(0, g.unflatten(flat)[0])).cos();
        num.push(v * c);
        den.push(c * c);
    }
    crate::sum::pairwise_sum(&num) / crate::sum::pairwise_sum(&den)
}

/// Evolves `amplitude · cos(2π k x₀ / L₀)` about `u ≡ 0` for every `k` in
/// `modes` over one e-folding time and compares the measured exponential
/// rate with the closed form. The step is fixed per mode so that
/// `dt (a³ + s₁a² + s₂a) = 10⁻³`, keeping the scheme's own error near 0.1%.
pub fn dispersion_experiment(
    grid: &std::sync::Arc<crate::grid::Grid>,
    p: &PotentialParams,
    modes: &[u32],
    amplitude: f64,
) -> Result<Vec<DispersionRow>> {
    let model = Model::exact(*p);
    let lin = (2.0 * p.lambda - p.eta).abs();
    let mut rows = Vec::with_capacity(modes.len());
    for &mode in modes {
        let spec = crate::initdata::InitialSpec::single_mode(0.0, amplitude, mode);
        let u0 = crate::initdata::generate(&spec, grid)?;
        let k = 2.0 * std::f64::consts::PI * f64::from(mode) / grid.lengths()[0];
        let a = k * k;
        let sigma = crate::model::dispersion_sigma(k, p);
        let (top, zeroth) = model.frozen_bounds(&u0)?;
        let stiff = a * a * a + (top + lin) * a * a + zeroth * a;
        let dt = 1e-3 / (sigma.abs() + stiff);
        let t_end = if sigma != 0.0 { 1.0 / sigma.abs() } else { 1.0 };
        let cfg = SolverConfig { dt0: dt, dt_max: dt, dt_min: dt * 1e-6, ..Default::default() };
        let s = advance(&u0, t_end, p, &cfg, crate::stepper::NoObserver)?;
        let measured = (cos_coefficient(&s.field, k) / cos_coefficient(&u0, k)).ln() / s.t;
        let rel_error = if sigma != 0.0 { (measured - sigma).abs() / sigma.abs() } else { measured.abs() };
        rows.push(DispersionRow { mode, wavenumber: k, sigma_closed: sigma, sigma_measured: measured, rel_error });
    }
    Ok(rows)
}
