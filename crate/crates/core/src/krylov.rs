//! Restarted GMRES with right preconditioning.

use crate::error::Result;
use crate::sum::pairwise_sum_by;

#[derive(Debug, Clone)]
pub struct GmresOutcome {
    pub x: Vec<f64>,
    /// Total Arnoldi steps over all restart cycles.
    pub iters: usize,
    /// Final residual norm `‖b - Ax‖` as tracked by the Givens recurrence.
    pub residual: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct GmresOptions {
    pub rtol: f64,
    pub restart: usize,
    pub max_iters: usize,
}

impl Default for GmresOptions {
    fn default() -> Self {
        Self { rtol: 1e-8, restart: 40, max_iters: 400 }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    pairwise_sum_by(a.len(), |i| a[i] * b[i])
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Solves `A x = b` from `x = 0` with the right-preconditioned system
/// `A M⁻¹ y = b`, `x = M⁻¹ y`.
pub fn gmres(
    mut apply: impl FnMut(&[f64]) -> Result<Vec<f64>>,
    precond: impl Fn(&[f64]) -> Result<Vec<f64>>,
    b: &[f64],
    opts: GmresOptions,
) -> Result<GmresOutcome> {
    let n = b.len();
    let bnorm = norm(b);
    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        return Ok(GmresOutcome { x, iters: 0, residual: 0.0, converged: true });
    }
    let target = opts.rtol * bnorm;
    let m = opts.restart.max(1);
    let mut iters = 0;
    let mut r = b.to_vec();
    let mut beta = bnorm;

    loop {
        let mut basis: Vec<Vec<f64>> = vec![r.iter().map(|v| v / beta).collect()];
        let mut h = vec![vec![0.0; m]; m + 1];
        let (mut cs, mut sn) = (vec![0.0; m], vec![0.0; m]);
        let mut g = vec![0.0; m + 1];
        g[0] = beta;
        let mut k = 0;
        while k < m && iters < opts.max_iters {
            let z = precond(&basis[k])?;
            let mut w = apply(&z)?;
            // modified Gram-Schmidt, twice for robustness
            for _ in 0..2 {
                for (j, v) in basis.iter().enumerate() {
                    let c = dot(&w, v);
                    h[j][k] += c;
                    w.iter_mut().zip(v).for_each(|(w, v)| *w -= c * v);
                }
            }
            let wn = norm(&w);
            h[k + 1][k] = wn;
            for j in 0..k {
                let t = cs[j] * h[j][k] + sn[j] * h[j + 1][k];
                h[j + 1][k] = -sn[j] * h[j][k] + cs[j] * h[j + 1][k];
                h[j][k] = t;
            }
            let d = h[k][k].hypot(h[k + 1][k]);
            if d == 0.0 {
                cs[k] = 1.0;
                sn[k] = 0.0;
            } else {
                cs[k] = h[k][k] / d;
                sn[k] = h[k + 1][k] / d;
            }
            h[k][k] = d;
            h[k + 1][k] = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] *= cs[k];
            k += 1;
            iters += 1;
            if g[k].abs() <= target || wn == 0.0 {
                break;
            }
            basis.push(w.iter().map(|v| v / wn).collect());
        }

        // back substitution for the Krylov coefficients
        let mut y = vec![0.0; k];
        for i in (0..k).rev() {
            let s: f64 = (i + 1..k).map(|j| h[i][j] * y[j]).sum();
            y[i] = if h[i][i] == 0.0 { 0.0 } else { (g[i] - s) / h[i][i] };
        }
        let mut dy = vec![0.0; n];
        for (yi, v) in y.iter().zip(&basis) {
            dy.iter_mut().zip(v).for_each(|(d, v)| *d += yi * v);
        }
        let dx = precond(&dy)?;
        x.iter_mut().zip(&dx).for_each(|(x, d)| *x += d);

        // true residual for the restart
        let ax = apply(&x)?;
        r = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
        beta = norm(&r);
        if beta <= target || iters >= opts.max_iters {
            return Ok(GmresOutcome { x, iters, residual: beta, converged: beta <= target });
        }
    }
}
