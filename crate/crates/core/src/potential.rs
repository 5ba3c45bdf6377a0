//! Scalar nonlinearities of the logarithmic (Flory-Huggins) potential.
//!
//! With `beta(r) = atanh(r)` the monotone part of `F'`, the model uses
//!
//! * `F(r) = phi(r) - lambda/2 r^2`, where `phi` is the mixing entropy,
//! * `f(r) = beta(r) - lambda r`,
//! * `a(r) = 2 beta'(r)`,
//! * `g(r) = -lambda r beta'(r) + (eta - lambda) beta(r) + (lambda^2 - lambda eta) r`.
//!
//! Exact evaluators reject arguments outside `(-1, 1)`. Clamping is the
//! separate [`truncate`] operation, and [`ExtendedNonlinearity`] continues
//! the singular functions past a knee with their second-order Taylor
//! polynomials.

use serde::{Deserialize, Serialize};

use crate::error::{FchError, Result};

const OPEN_INTERVAL: &str = "(-1, 1)";
const CLOSED_INTERVAL: &str = "[-1, 1]";

/// Potential convexity shift `lambda` and Willmore/FCH coupling `eta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PotentialParams {
    pub lambda: f64,
    pub eta: f64,
}

impl PotentialParams {
    pub fn new(lambda: f64, eta: f64) -> Result<Self> {
        if !lambda.is_finite() || !eta.is_finite() {
            return Err(FchError::Config(format!(
                "lambda and eta must be finite (got {lambda}, {eta})"
            )));
        }
        Ok(Self { lambda, eta })
    }
}

/// Approximation level `n >= 3`: states are confined to `[-1+1/n, 1-1/n]`
/// and the singular functions are extended beyond `±(1 - 1/(2n))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct TruncationLevel(u32);

impl TruncationLevel {
    pub fn new(n: u32) -> Result<Self> {
        if n < 3 {
            return Err(FchError::Config(format!(
                "truncation level must be at least 3 (got {n})"
            )));
        }
        Ok(Self(n))
    }

    pub fn n(self) -> u32 {
        self.0
    }

    /// Upper clamp bound `1 - 1/n`.
    pub fn clamp_bound(self) -> f64 {
        1.0 - 1.0 / f64::from(self.0)
    }

    /// Extension knee `1 - 1/(2n)`.
    pub fn knee(self) -> f64 {
        1.0 - 0.5 / f64::from(self.0)
    }
}

impl TryFrom<u32> for TruncationLevel {
    type Error = FchError;
    fn try_from(n: u32) -> Result<Self> {
        Self::new(n)
    }
}

impl From<TruncationLevel> for u32 {
    fn from(l: TruncationLevel) -> u32 {
        l.0
    }
}

fn check_open(r: f64) -> Result<()> {
    if r.is_finite() && r.abs() < 1.0 {
        Ok(())
    } else {
        Err(FchError::Domain { value: r, interval: OPEN_INTERVAL })
    }
}

/// `1 - r^2` without cancellation near `|r| = 1`.
#[inline]
fn one_minus_sq(r: f64) -> f64 {
    (1.0 - r) * (1.0 + r)
}

/// `(beta, beta', beta'')` at `r`.
pub fn eval_beta(r: f64) -> Result<(f64, f64, f64)> {
    check_open(r)?;
    Ok(beta_unchecked(r))
}

#[inline]
fn beta_unchecked(r: f64) -> (f64, f64, f64) {
    let q = one_minus_sq(r);
    (atanh_odd(r), 1.0 / q, 2.0 * r / (q * q))
}

/// `atanh` evaluated on `|r|` so that oddness holds bit-for-bit.
#[inline]
fn atanh_odd(r: f64) -> f64 {
    let s = r.abs();
    (0.5 * (s.ln_1p() - (-s).ln_1p())).copysign(r)
}

#[inline]
fn beta3_unchecked(r: f64) -> f64 {
    let q = one_minus_sq(r);
    2.0 * (1.0 + 3.0 * r * r) / (q * q * q)
}

/// Mixing entropy `½(1+r)ln(1+r) + ½(1-r)ln(1-r)`, continuous up to `±1`.
pub fn eval_entropy(r: f64) -> Result<f64> {
    if !(r.is_finite() && r.abs() <= 1.0) {
        return Err(FchError::Domain { value: r, interval: CLOSED_INTERVAL });
    }
    Ok(entropy_unchecked(r))
}

#[inline]
fn entropy_unchecked(r: f64) -> f64 {
    let xlogx = |s: f64, l: f64| if s == 0.0 { 0.0 } else { s * l };
    0.5 * (xlogx(1.0 + r, r.ln_1p()) + xlogx(1.0 - r, (-r).ln_1p()))
}

/// Flory-Huggins potential `F`, defined on the closed interval.
pub fn eval_big_f(p: &PotentialParams, r: f64) -> Result<f64> {
    Ok(eval_entropy(r)? - 0.5 * p.lambda * r * r)
}

/// `f = F' = beta - lambda r`.
pub fn eval_f(p: &PotentialParams, r: f64) -> Result<f64> {
    check_open(r)?;
    Ok(atanh_odd(r) - p.lambda * r)
}

/// `(a, a', a'')` with `a = 2 beta' = 2/(1-r^2)`.
pub fn eval_a(r: f64) -> Result<(f64, f64, f64)> {
    check_open(r)?;
    let q = one_minus_sq(r);
    Ok((2.0 / q, 4.0 * r / (q * q), 4.0 * (1.0 + 3.0 * r * r) / (q * q * q)))
}

/// `(g, g')`.
pub fn eval_g(p: &PotentialParams, r: f64) -> Result<(f64, f64)> {
    check_open(r)?;
    let (b, b1, b2) = beta_unchecked(r);
    Ok(g_from_beta(p, r, b, b1, b2))
}

#[inline]
fn g_from_beta(p: &PotentialParams, r: f64, b: f64, b1: f64, b2: f64) -> (f64, f64) {
    let (l, e) = (p.lambda, p.eta);
    let g = -l * r * b1 + (e - l) * b + (l * l - l * e) * r;
    let g1 = -l * r * b2 + (e - 2.0 * l) * b1 + l * l - l * e;
    (g, g1)
}

#[inline]
fn g2_from_beta(p: &PotentialParams, r: f64, b2: f64, b3: f64) -> f64 {
    (p.eta - 3.0 * p.lambda) * b2 - p.lambda * r * b3
}

/// Clamp to `[-1+1/n, 1-1/n]`.
pub fn truncate(r: f64, lvl: TruncationLevel) -> f64 {
    let c = lvl.clamp_bound();
    r.clamp(-c, c)
}

/// Values of `beta` and its first two derivatives at the knee, plus the
/// matching data for `g` and the entropy.
#[derive(Debug, Clone, Copy)]
struct KneeData {
    knee: f64,
    beta: (f64, f64, f64),
    entropy: f64,
}

/// Globally defined C² continuations of `beta`, `g` and the entropy.
///
/// Inside `[-k, k]`, `k = 1 - 1/(2n)`, every evaluator returns exactly what
/// the singular evaluator returns. Outside, `beta` and `g` follow their
/// quadratic Taylor polynomials about the nearer knee, and the entropy
/// follows the cubic whose derivative is the extended `beta`.
#[derive(Debug, Clone, Copy)]
pub struct ExtendedNonlinearity {
    level: TruncationLevel,
    knee: KneeData,
}

/// Knee offset and the sign used to reflect `r < -k` onto `r > k`.
#[inline]
fn outside(r: f64, k: f64) -> Option<(f64, f64)> {
    if r > k {
        Some((r - k, 1.0))
    } else if r < -k {
        Some((-r - k, -1.0))
    } else {
        None
    }
}

impl ExtendedNonlinearity {
    pub fn new(level: TruncationLevel) -> Self {
        let k = level.knee();
        Self {
            level,
            knee: KneeData { knee: k, beta: beta_unchecked(k), entropy: entropy_unchecked(k) },
        }
    }

    pub fn level(&self) -> TruncationLevel {
        self.level
    }

    /// `(beta, beta', beta'')` on all of ℝ.
    pub fn beta(&self, r: f64) -> (f64, f64, f64) {
        let KneeData { knee, beta: (b, b1, b2), .. } = self.knee;
        match outside(r, knee) {
            None => beta_unchecked(r),
            // beta odd, beta' even, beta'' odd
            Some((d, s)) => (
                s * (b + b1 * d + 0.5 * b2 * d * d),
                b1 + b2 * d,
                s * b2,
            ),
        }
    }

    /// Third derivative of the extended `beta`; zero past the knee.
    pub fn beta3(&self, r: f64) -> f64 {
        match outside(r, self.knee.knee) {
            None => beta3_unchecked(r),
            Some(_) => 0.0,
        }
    }

    /// `(g, g')` on all of ℝ.
    pub fn g(&self, p: &PotentialParams, r: f64) -> (f64, f64) {
        let KneeData { knee, beta: (b, b1, b2), .. } = self.knee;
        match outside(r, knee) {
            None => {
                let (b, b1, b2) = beta_unchecked(r);
                g_from_beta(p, r, b, b1, b2)
            }
            Some((d, s)) => {
                // g is odd: expand about +knee and reflect
                let (g, g1) = g_from_beta(p, knee, b, b1, b2);
                let g2 = g2_from_beta(p, knee, b2, beta3_unchecked(knee));
                (s * (g + g1 * d + 0.5 * g2 * d * d), g1 + g2 * d)
            }
        }
    }

    /// Entropy continuation with derivative equal to the extended `beta`.
    pub fn entropy(&self, r: f64) -> f64 {
        let KneeData { knee, beta: (b, b1, b2), entropy } = self.knee;
        match outside(r, knee) {
            None => entropy_unchecked(r),
            // entropy is even
            Some((d, _)) => entropy + b * d + 0.5 * b1 * d * d + b2 * d * d * d / 6.0,
        }
    }
}

/// Which evaluators the model uses: the singular ones, or the extensions
/// of a truncation level.
#[derive(Debug, Clone, Copy)]
pub enum Nonlinearity {
    Exact,
    Extended(ExtendedNonlinearity),
}

impl Nonlinearity {
    pub fn for_level(level: Option<TruncationLevel>) -> Self {
        match level {
            Some(l) => Nonlinearity::Extended(ExtendedNonlinearity::new(l)),
            None => Nonlinearity::Exact,
        }
    }

    pub fn level(&self) -> Option<TruncationLevel> {
        match self {
            Nonlinearity::Exact => None,
            Nonlinearity::Extended(e) => Some(e.level()),
        }
    }

    #[inline]
    pub fn beta(&self, r: f64) -> Result<(f64, f64, f64)> {
        match self {
            Nonlinearity::Exact => eval_beta(r),
            Nonlinearity::Extended(e) => Ok(e.beta(r)),
        }
    }

    #[inline]
    pub fn beta3(&self, r: f64) -> Result<f64> {
        match self {
            Nonlinearity::Exact => {
                check_open(r)?;
                Ok(beta3_unchecked(r))
            }
            Nonlinearity::Extended(e) => Ok(e.beta3(r)),
        }
    }

    #[inline]
    pub fn g(&self, p: &PotentialParams, r: f64) -> Result<(f64, f64)> {
        match self {
            Nonlinearity::Exact => eval_g(p, r),
            Nonlinearity::Extended(e) => Ok(e.g(p, r)),
        }
    }

    /// `F(r)`; the exact potential is finite on the closed interval.
    #[inline]
    pub fn big_f(&self, p: &PotentialParams, r: f64) -> Result<f64> {
        let phi = match self {
            Nonlinearity::Exact => eval_entropy(r)?,
            Nonlinearity::Extended(e) => e.entropy(r),
        };
        Ok(phi - 0.5 * p.lambda * r * r)
    }

    /// Largest `2 beta'` on `|r| <= bound`.
    pub fn max_two_beta_prime(&self, bound: f64) -> Result<f64> {
        Ok(2.0 * self.beta(bound.abs())?.1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const BETA_HALF: f64 = 0.549_306_144_334_054_8;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn beta_values() {
        assert_eq!(eval_beta(0.0).unwrap(), (0.0, 1.0, 0.0));
        let (b, b1, b2) = eval_beta(0.5).unwrap();
        assert!(close(b, BETA_HALF, 1e-15));
        assert!(close(b1, 4.0 / 3.0, 1e-15));
        assert!(close(b2, 16.0 / 9.0, 1e-15));
        let (b, b1, b2) = eval_beta(-0.5).unwrap();
        assert!(close(b, -BETA_HALF, 1e-15));
        assert!(close(b1, 4.0 / 3.0, 1e-15));
        assert!(close(b2, -16.0 / 9.0, 1e-15));
        assert!(matches!(eval_beta(1.0), Err(FchError::Domain { .. })));
        assert!(eval_beta(-1.5).is_err());
        assert!(eval_beta(f64::NAN).is_err());
    }

    #[test]
    fn potential_values() {
        let p0 = PotentialParams::new(0.0, 0.0).unwrap();
        assert_eq!(eval_big_f(&p0, 0.0).unwrap(), 0.0);
        assert!(close(eval_big_f(&p0, 1.0).unwrap(), std::f64::consts::LN_2, 1e-15));
        assert!(close(eval_big_f(&p0, -1.0).unwrap(), std::f64::consts::LN_2, 1e-15));
        assert!(close(eval_big_f(&p0, 0.5).unwrap(), 0.130_812_035_941_136_96, 1e-14));
        let p = PotentialParams::new(2.0, 0.0).unwrap();
        assert!(close(eval_big_f(&p, 1.0).unwrap(), std::f64::consts::LN_2 - 1.0, 1e-15));
        assert!(eval_big_f(&p, 1.0 + 1e-12).is_err());
    }

    #[test]
    fn f_values() {
        for l in [-2.0, 0.0, 3.0] {
            assert_eq!(eval_f(&PotentialParams::new(l, 1.0).unwrap(), 0.0).unwrap(), 0.0);
        }
        let p0 = PotentialParams::new(0.0, 0.0).unwrap();
        assert!(close(eval_f(&p0, 0.5).unwrap(), BETA_HALF, 1e-15));
        let p2 = PotentialParams::new(2.0, 0.0).unwrap();
        assert!(close(eval_f(&p2, 0.5).unwrap(), BETA_HALF - 1.0, 1e-14));
        assert!(eval_f(&p2, 1.0).is_err());
    }

    #[test]
    fn a_values() {
        assert_eq!(eval_a(0.0).unwrap(), (2.0, 0.0, 4.0));
        let (a, a1, a2) = eval_a(0.5).unwrap();
        assert!(close(a, 8.0 / 3.0, 1e-15));
        assert!(close(a1, 32.0 / 9.0, 1e-15));
        // 4(1+3r²)/(1-r²)³ at r = 1/2
        assert!(close(a2, 448.0 / 27.0, 1e-15));
        for r in [-0.9, 0.0, 0.9] {
            assert_eq!(eval_a(r).unwrap().0, 2.0 * eval_beta(r).unwrap().1);
        }
    }

    #[test]
    fn g_values() {
        let zero = PotentialParams::new(0.0, 0.0).unwrap();
        for r in [-0.99, -0.3, 0.0, 0.7] {
            assert_eq!(eval_g(&zero, r).unwrap(), (0.0, 0.0));
        }
        for (l, e) in [(1.0, -1.0), (3.0, 1.0), (-0.5, 2.0)] {
            let p = PotentialParams::new(l, e).unwrap();
            let (g, g1) = eval_g(&p, 0.0).unwrap();
            assert_eq!(g, 0.0);
            assert!(close(g1, e - 2.0 * l + l * l - l * e, 1e-15));
        }
        let p = PotentialParams::new(1.0, -1.0).unwrap();
        assert!(close(eval_g(&p, 0.5).unwrap().0, -0.765_278_955_334_776_4, 1e-14));
    }

    #[test]
    fn truncate_values() {
        let l10 = TruncationLevel::new(10).unwrap();
        let l4 = TruncationLevel::new(4).unwrap();
        assert!(close(truncate(0.999, l10), 0.9, 1e-15));
        assert_eq!(truncate(0.0, l10), 0.0);
        assert_eq!(truncate(-5.0, l4), -0.75);
        assert!(TruncationLevel::new(2).is_err());
        assert!(l10.clamp_bound() < l10.knee() && l10.knee() < 1.0);
    }

    #[test]
    fn extension_values() {
        let ext = ExtendedNonlinearity::new(TruncationLevel::new(10).unwrap());
        assert_eq!(ext.beta(0.0).0, 0.0);
        assert!(close(ext.beta(0.95).0, 1.831_780_823_064_823_2, 1e-14));
        assert!(close(ext.beta(2.0).0, 122.778_526_385_195, 1e-12));
        assert!(close(ext.beta(-2.0).0, -122.778_526_385_195, 1e-12));
    }

    #[test]
    fn extension_agrees_bitwise_inside_knee() {
        let p = PotentialParams::new(3.0, -1.0).unwrap();
        for n in [3, 10, 40] {
            let ext = ExtendedNonlinearity::new(TruncationLevel::new(n).unwrap());
            let k = ext.level().knee();
            for i in 0..=2000 {
                let r = -k + 2.0 * k * f64::from(i) / 2000.0;
                assert_eq!(ext.beta(r), eval_beta(r).unwrap());
                assert_eq!(ext.g(&p, r), eval_g(&p, r).unwrap());
                assert_eq!(ext.entropy(r), eval_entropy(r).unwrap());
            }
        }
    }

    #[test]
    fn extension_is_c2_and_monotone() {
        let p = PotentialParams::new(2.0, 0.5).unwrap();
        let ext = ExtendedNonlinearity::new(TruncationLevel::new(8).unwrap());
        let k = ext.level().knee();
        let h = 1e-6;
        for s in [-1.0, 1.0] {
            let (lo, hi) = (ext.beta(s * (k - 1e-13)), ext.beta(s * (k + 1e-13)));
            assert!(close(lo.0, hi.0, 1e-10) && close(lo.1, hi.1, 1e-10) && close(lo.2, hi.2, 1e-10));
            // derivatives of the continuation match finite differences past the knee
            for d in [0.01, 0.5, 3.0] {
                let r = s * (k + d);
                let fd_b = (ext.beta(r + h).0 - ext.beta(r - h).0) / (2.0 * h);
                let fd_b1 = (ext.beta(r + h).1 - ext.beta(r - h).1) / (2.0 * h);
                let fd_g = (ext.g(&p, r + h).0 - ext.g(&p, r - h).0) / (2.0 * h);
                let fd_phi = (ext.entropy(r + h) - ext.entropy(r - h)) / (2.0 * h);
                assert!(close(fd_b, ext.beta(r).1, 1e-6));
                assert!(close(fd_b1, ext.beta(r).2, 1e-6));
                assert!(close(fd_g, ext.g(&p, r).1, 1e-6));
                assert!(close(fd_phi, ext.beta(r).0, 1e-6));
            }
        }
        let mut prev = f64::NEG_INFINITY;
        for i in 0..=4000 {
            let r = -4.0 + 8.0 * f64::from(i) / 4000.0;
            let (b, b1, _) = ext.beta(r);
            assert!(b > prev && b1 > 0.0);
            prev = b;
        }
    }

    #[test]
    fn derivatives_match_central_differences() {
        let h = 1e-6;
        let params = [(0.0, 0.0), (3.0, 1.0), (-1.0, 2.5)];
        for i in 0..=198 {
            let r = -0.99 + 0.01 * f64::from(i);
            let (b, b1, b2) = eval_beta(r).unwrap();
            let fd1 = (eval_beta(r + h).unwrap().0 - eval_beta(r - h).unwrap().0) / (2.0 * h);
            let fd2 = (eval_beta(r + h).unwrap().1 - eval_beta(r - h).unwrap().1) / (2.0 * h);
            assert!((fd1 - b1).abs() <= 1e-5 * b1.abs().max(1e-300), "beta' at {r}");
            assert!((fd2 - b2).abs() <= 1e-5 * b2.abs() + 1e-9, "beta'' at {r}");
            let (_, a1, a2) = eval_a(r).unwrap();
            let fda1 = (eval_a(r + h).unwrap().0 - eval_a(r - h).unwrap().0) / (2.0 * h);
            let fda2 = (eval_a(r + h).unwrap().1 - eval_a(r - h).unwrap().1) / (2.0 * h);
            assert!((fda1 - a1).abs() <= 1e-5 * a1.abs() + 1e-9);
            assert!((fda2 - a2).abs() <= 1e-5 * a2.abs());
            for (l, e) in params {
                let p = PotentialParams::new(l, e).unwrap();
                let fdf = (eval_big_f(&p, r + h).unwrap() - eval_big_f(&p, r - h).unwrap()) / (2.0 * h);
                let f = eval_f(&p, r).unwrap();
                assert!((fdf - f).abs() <= 1e-5 * f.abs() + 1e-9);
                let (_, g1) = eval_g(&p, r).unwrap();
                let fdg = (eval_g(&p, r + h).unwrap().0 - eval_g(&p, r - h).unwrap().0) / (2.0 * h);
                assert!((fdg - g1).abs() <= 1e-5 * g1.abs() + 1e-9, "g' at {r} for {p:?}");
            }
            let _ = b;
        }
    }

    #[test]
    fn beta_times_beta_prime_is_nondecreasing() {
        let n = 10_000;
        let mut prev = f64::NEG_INFINITY;
        for i in 1..n {
            let r = -1.0 + 2.0 * i as f64 / n as f64;
            let (b, b1, _) = eval_beta(r).unwrap();
            assert!(b * b1 >= prev, "at {r}");
            prev = b * b1;
        }
    }

    #[test]
    fn beta_beta_prime_dominates_g_near_pure_phases() {
        let p = PotentialParams::new(1.0, 1.0).unwrap();
        let ratio = |r: f64| {
            let (b, b1, _) = eval_beta(r).unwrap();
            (b * b1).abs() / eval_g(&p, r).unwrap().0.abs()
        };
        let mut prev = 0.0;
        for e in 1..=12 {
            let d = 10f64.powi(-e);
            for s in [-1.0, 1.0] {
                let q = ratio(s * (1.0 - d));
                assert!(q > prev * 0.999_999 || s < 0.0);
                // for lambda = eta = 1, g = -r beta', so the ratio is beta(r)/r
                let expect = (1.0 - d).atanh() / (1.0 - d);
                // conditioning of beta near ±1 limits agreement to ~ulp(r) * beta'
                assert!(close(q, expect, 1e-6));
            }
            prev = ratio(1.0 - d);
        }
        assert!(ratio(1.0 - 1e-6) > 7.0);
        assert!(ratio(1.0 - 1e-12) > 14.0);
    }

    #[test]
    fn near_boundary_accuracy() {
        // atanh(1 - d) = ½ ln(2/d - 1)
        for d in [1e-6f64, 1e-9, 1e-12] {
            let r = 1.0 - d;
            let exact = 0.5 * (2.0 / (1.0 - r) - 1.0).ln();
            assert!(close(eval_beta(r).unwrap().0, exact, 1e-12));
            assert!(close(eval_beta(r).unwrap().1, 1.0 / ((1.0 - r) * (1.0 + r)), 1e-15));
        }
    }

    proptest! {
        #[test]
        fn parity(r in -0.999_999f64..0.999_999, l in -5.0f64..5.0, e in -5.0f64..5.0) {
            let p = PotentialParams::new(l, e).unwrap();
            prop_assert_eq!(eval_beta(-r).unwrap().0, -eval_beta(r).unwrap().0);
            prop_assert!(close(eval_f(&p, -r).unwrap(), -eval_f(&p, r).unwrap(), 1e-14));
            prop_assert!(close(eval_g(&p, -r).unwrap().0, -eval_g(&p, r).unwrap().0, 1e-13));
            prop_assert!(close(eval_big_f(&p, -r).unwrap(), eval_big_f(&p, r).unwrap(), 1e-14));
        }

        #[test]
        fn lambda_convexity(r in -0.999_999_9f64..0.999_999_9, l in -5.0f64..5.0) {
            // F'' + lambda = beta' >= 1
            let (_, b1, _) = eval_beta(r).unwrap();
            let (a, _, _) = eval_a(r).unwrap();
            prop_assert!(b1 >= 1.0);
            prop_assert!(close(a / 2.0 - l + l, b1, 1e-14));
        }

        #[test]
        fn truncate_idempotent(r in -10.0f64..10.0, n in 3u32..200) {
            let lvl = TruncationLevel::new(n).unwrap();
            let t = truncate(r, lvl);
            prop_assert_eq!(truncate(t, lvl), t);
            prop_assert!(t.abs() <= lvl.clamp_bound());
        }
    }
}
