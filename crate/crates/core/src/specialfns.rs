//! Hermite and Legendre polynomials, Gaussian moments and log-scale magnitudes.
//!
//! Conventions used throughout the crate:
//! * Hermite polynomials are the physicists' `H_n` (`H_1 = 2x`).
//! * Complex powers and square roots take the principal branch.
//! * Anything whose size depends geometrically on `n` is carried as a
//!   [`LogMagnitude`] and only turned into a float on request.

use std::f64::consts::PI;
use std::ops::{Div, Mul};

use num_complex::Complex64;
use thiserror::Error;

use crate::gausspoly::GaussPoly;

/// Largest Hermite degree `hermite_coeffs` accepts.
pub const MAX_HERMITE_DEGREE: usize = 500;

/// Slack below 1 tolerated by [`legendre_eval`] before reporting a domain error.
pub const LEGENDRE_DOMAIN_TOL: f64 = 1e-12;

const RESCALE_THRESHOLD: f64 = 1e100;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpecialFnError {
    #[error("degree {n} exceeds the configured maximum {max}")]
    DegreeTooLarge { n: usize, max: usize },
    #[error("{what}: argument {value} is outside the domain")]
    Domain { what: &'static str, value: f64 },
    #[error("gaussian weight with sigma = {sigma} is not integrable (Re sigma <= 0)")]
    NonIntegrable { sigma: Complex64 },
}

/// Polynomial coefficients in ascending order of degree.
///
/// Trailing zeros are stripped on construction, so the zero polynomial is the
/// empty list.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PolyCoeffs(Vec<Complex64>);

impl PolyCoeffs {
    pub fn new(mut coeffs: Vec<Complex64>) -> Self {
        while coeffs.last().is_some_and(|c| *c == Complex64::new(0.0, 0.0)) {
            coeffs.pop();
        }
        Self(coeffs)
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    pub fn zero() -> Self {
        Self(Vec::new())
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.0.len().checked_sub(1)
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<Complex64> {
        self.0
    }

    /// Coefficient of `x^k`, zero beyond the degree.
    pub fn coeff(&self, k: usize) -> Complex64 {
        self.0.get(k).copied().unwrap_or_default()
    }

    /// Horner evaluation.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.0
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    /// Sum of `|c_k| |x|^k`, the magnitude that bounds the rounding error of
    /// [`PolyCoeffs::eval`].
    pub fn abs_eval(&self, x: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, c| acc * x.abs() + c.norm())
    }
}

/// A nonnegative magnitude stored as its natural logarithm, together with a
/// unit phase. Zero is the explicit state `ln_abs = -inf`, `phase = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogMagnitude {
    ln_abs: f64,
    phase: Complex64,
}

impl LogMagnitude {
    pub fn zero() -> Self {
        Self {
            ln_abs: f64::NEG_INFINITY,
            phase: Complex64::new(0.0, 0.0),
        }
    }

    pub fn one() -> Self {
        Self::from_ln(0.0)
    }

    /// Positive real number `exp(ln_abs)`.
    pub fn from_ln(ln_abs: f64) -> Self {
        Self {
            ln_abs,
            phase: Complex64::new(1.0, 0.0),
        }
    }

    pub fn from_parts(ln_abs: f64, phase: Complex64) -> Self {
        if phase == Complex64::new(0.0, 0.0) || ln_abs == f64::NEG_INFINITY {
            return Self::zero();
        }
        Self {
            ln_abs,
            phase: phase / phase.norm(),
        }
    }

    pub fn from_complex(z: Complex64) -> Self {
        let r = z.norm();
        if r == 0.0 {
            Self::zero()
        } else {
            Self {
                ln_abs: r.ln(),
                phase: z / r,
            }
        }
    }

    pub fn from_real(x: f64) -> Self {
        Self::from_complex(Complex64::new(x, 0.0))
    }

    pub fn is_zero(&self) -> bool {
        self.ln_abs == f64::NEG_INFINITY
    }

    pub fn ln_abs(&self) -> f64 {
        self.ln_abs
    }

    pub fn phase(&self) -> Complex64 {
        self.phase
    }

    pub fn to_complex(&self) -> Complex64 {
        if self.is_zero() {
            Complex64::new(0.0, 0.0)
        } else {
            self.phase * self.ln_abs.exp()
        }
    }

    /// Real part of the linear value.
    pub fn to_f64(&self) -> f64 {
        self.to_complex().re
    }

    pub fn powi(&self, k: i32) -> Self {
        if self.is_zero() {
            return if k == 0 { Self::one() } else { Self::zero() };
        }
        Self::from_parts(self.ln_abs * f64::from(k), self.phase.powi(k))
    }
}

impl Mul for LogMagnitude {
    type Output = LogMagnitude;

    fn mul(self, rhs: Self) -> Self {
        if self.is_zero() || rhs.is_zero() {
            return Self::zero();
        }
        Self::from_parts(self.ln_abs + rhs.ln_abs, self.phase * rhs.phase)
    }
}

impl Div for LogMagnitude {
    type Output = LogMagnitude;

    /// Division by zero yields an infinite magnitude.
    fn div(self, rhs: Self) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        Self::from_parts(self.ln_abs - rhs.ln_abs, self.phase / rhs.phase)
    }
}

/// Monomial coefficients of the physicists' Hermite polynomial `H_n`.
///
/// The coefficients are stored as doubles; once they exceed 2^53 (around
/// `n = 30`) they are rounded, and evaluation through them loses relative
/// accuracy quickly for larger `n`. Use [`hermite_value`] for values.
pub fn hermite_coeffs(n: usize) -> Result<PolyCoeffs, SpecialFnError> {
    if n > MAX_HERMITE_DEGREE {
        return Err(SpecialFnError::DegreeTooLarge {
            n,
            max: MAX_HERMITE_DEGREE,
        });
    }
    let mut prev = vec![1.0];
    if n == 0 {
        return Ok(PolyCoeffs::from_real(&prev));
    }
    let mut cur = vec![0.0, 2.0];
    for k in 1..n {
        let mut next = vec![0.0; k + 2];
        for (i, &c) in cur.iter().enumerate() {
            next[i + 1] += 2.0 * c;
        }
        for (i, &c) in prev.iter().enumerate() {
            next[i] -= 2.0 * k as f64 * c;
        }
        prev = cur;
        cur = next;
    }
    Ok(PolyCoeffs::from_real(&cur))
}

/// `H_n(x)` by the three-term recurrence.
pub fn hermite_value(n: usize, x: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, 2.0 * x);
    if n == 0 {
        return prev;
    }
    for k in 1..n {
        let next = 2.0 * x * cur - 2.0 * k as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// `P_n(x)` for `x >= 1`, by the upward recurrence with rescaling, in log scale.
///
/// Arguments in `[1 - LEGENDRE_DOMAIN_TOL, 1)` are treated as 1; anything
/// smaller is a domain error.
pub fn legendre_eval(n: usize, x: f64) -> Result<LogMagnitude, SpecialFnError> {
    if !(x >= 1.0 - LEGENDRE_DOMAIN_TOL) || !x.is_finite() {
        return Err(SpecialFnError::Domain {
            what: "legendre_eval requires x >= 1",
            value: x,
        });
    }
    let x = x.max(1.0);
    if n == 0 {
        return Ok(LogMagnitude::one());
    }
    let (mut prev, mut cur) = (1.0_f64, x);
    let mut ln_scale = 0.0;
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0) * x * cur - kf * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
        if cur > RESCALE_THRESHOLD {
            prev /= RESCALE_THRESHOLD;
            cur /= RESCALE_THRESHOLD;
            ln_scale += RESCALE_THRESHOLD.ln();
        }
    }
    Ok(LogMagnitude::from_ln(cur.ln() + ln_scale))
}

/// `P_n(z)` for complex `z`, same recurrence, returned in log scale.
pub fn legendre_eval_complex(n: usize, z: Complex64) -> LogMagnitude {
    if n == 0 {
        return LogMagnitude::one();
    }
    let (mut prev, mut cur) = (Complex64::new(1.0, 0.0), z);
    let mut ln_scale = 0.0;
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0) * z * cur - kf * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
        if cur.norm() > RESCALE_THRESHOLD {
            prev /= RESCALE_THRESHOLD;
            cur /= RESCALE_THRESHOLD;
            ln_scale += RESCALE_THRESHOLD.ln();
        }
    }
    let m = LogMagnitude::from_complex(cur);
    LogMagnitude::from_parts(m.ln_abs() + ln_scale, m.phase())
}

/// Large-degree form `(2 pi n)^{-1/2} (x^2-1)^{-1/4} (x + sqrt(x^2-1))^{n+1/2}`,
/// valid for `x > 1`.
pub fn legendre_asymptotic(n: usize, x: f64) -> Result<LogMagnitude, SpecialFnError> {
    if n == 0 {
        return Err(SpecialFnError::Domain {
            what: "legendre_asymptotic requires n >= 1",
            value: 0.0,
        });
    }
    if !(x > 1.0) || !x.is_finite() {
        return Err(SpecialFnError::Domain {
            what: "legendre_asymptotic requires x > 1",
            value: x,
        });
    }
    let nf = n as f64;
    // x^2 - 1 = (x - 1)(x + 1) keeps precision close to 1
    let w = (x - 1.0) * (x + 1.0);
    let ln = -0.5 * (2.0 * PI * nf).ln() - 0.25 * w.ln() + (nf + 0.5) * (x + w.sqrt()).ln();
    Ok(LogMagnitude::from_ln(ln))
}

/// `\int x^m exp(-sigma x^2) dx` over the real line.
pub fn gaussian_moment(m: usize, sigma: Complex64) -> Result<Complex64, SpecialFnError> {
    if !(sigma.re > 0.0) {
        return Err(SpecialFnError::NonIntegrable { sigma });
    }
    if m % 2 == 1 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    // M_0 = sqrt(pi / sigma), M_{2k} = M_{2k-2} (2k - 1) / (2 sigma)
    let mut moment = Complex64::new(PI.sqrt(), 0.0) / sigma.sqrt();
    for k in 1..=m / 2 {
        moment *= (2 * k - 1) as f64 / (2.0 * sigma);
    }
    Ok(moment)
}

/// Harmonic-oscillator eigenfunction `e_n(x) = H_n(x) exp(-x^2/2) / sqrt(2^n n! sqrt(pi))`.
pub fn hermite_basis_function(n: usize) -> GaussPoly {
    GaussPoly::hermite_basis(n)
}

/// `ln(k!)` for `k = 0..=n`.
pub(crate) fn ln_factorials(n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    out.push(acc);
    for k in 1..=n {
        acc += (k as f64).ln();
        out.push(acc);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn hermite_low_orders() {
        assert_eq!(hermite_coeffs(0).unwrap().coeffs(), &[c(1.0)]);
        assert_eq!(
            hermite_coeffs(3).unwrap().coeffs(),
            &[c(0.0), c(-12.0), c(0.0), c(8.0)]
        );
    }

    #[test]
    fn hermite_degree_cap() {
        assert!(hermite_coeffs(MAX_HERMITE_DEGREE).is_ok());
        assert_eq!(
            hermite_coeffs(MAX_HERMITE_DEGREE + 1),
            Err(SpecialFnError::DegreeTooLarge {
                n: 501,
                max: MAX_HERMITE_DEGREE
            })
        );
    }

    #[test]
    fn hermite_ten_at_one() {
        // independent oracle: the value recurrence
        let by_coeffs = hermite_coeffs(10).unwrap().eval(c(1.0)).re;
        let by_values = hermite_value(10, 1.0);
        assert!(((by_coeffs - by_values) / by_values).abs() < 1e-13);
        // H_10(1) = 8224
        assert_eq!(by_values, 8224.0);
    }

    #[test]
    fn legendre_small_orders() {
        assert_eq!(legendre_eval(0, 1.5).unwrap().to_f64(), 1.0);
        assert!((legendre_eval(1, 1.5).unwrap().to_f64() - 1.5).abs() < 1e-15);
        let s = 6.0 / 35f64.sqrt();
        let p2 = legendre_eval(2, s).unwrap().to_f64();
        assert!((p2 - (3.0 * s * s - 1.0) / 2.0).abs() < 1e-14);
        assert!((p2 - 1.042857142857143).abs() < 1e-12);
    }

    #[test]
    fn legendre_domain() {
        assert!(legendre_eval(3, 0.5).is_err());
        assert!(legendre_eval(3, f64::NAN).is_err());
        // within tolerance of 1 is clamped
        let p = legendre_eval(40, 1.0 - 1e-14).unwrap();
        assert!(p.ln_abs().abs() < 1e-15);
    }

    #[test]
    fn legendre_log_scale_survives_overflow() {
        // P_500(2) ~ 10^285 would be close to overflow; P_500(10) is not representable
        let p = legendre_eval(500, 10.0).unwrap();
        assert!(p.ln_abs().is_finite());
        assert!(p.ln_abs() > 1000.0);
    }

    #[test]
    fn legendre_asymptotic_against_recurrence() {
        for (n, x) in [(100, 1.1), (500, 1.014185)] {
            let exact = legendre_eval(n, x).unwrap().ln_abs();
            let approx = legendre_asymptotic(n, x).unwrap().ln_abs();
            assert!((approx - exact).exp_m1().abs() < 1e-2, "n={n} x={x}");
        }
        assert!(legendre_asymptotic(1, 1.0 + 1e-15).unwrap().ln_abs().is_finite());
        assert!(legendre_asymptotic(1, 1.0).is_err());
        assert!(legendre_asymptotic(0, 2.0).is_err());
    }

    #[test]
    fn legendre_complex_matches_real() {
        for n in [0, 1, 5, 60] {
            let a = legendre_eval(n, 1.3).unwrap();
            let b = legendre_eval_complex(n, c(1.3));
            assert!((a.ln_abs() - b.ln_abs()).abs() < 1e-12);
        }
    }

    #[test]
    fn moments() {
        let sqrt_pi = PI.sqrt();
        assert!((gaussian_moment(0, c(1.0)).unwrap().re - sqrt_pi).abs() < 1e-15);
        assert!((gaussian_moment(2, c(1.0)).unwrap().re - sqrt_pi / 2.0).abs() < 1e-15);
        assert_eq!(
            gaussian_moment(1, Complex64::new(2.0, 1.0)).unwrap(),
            c(0.0)
        );
        assert!(gaussian_moment(0, Complex64::new(0.0, 1.0)).is_err());
    }

    #[test]
    fn log_magnitude_arithmetic() {
        let a = LogMagnitude::from_real(-3.0);
        let b = LogMagnitude::from_real(0.5);
        assert!(((a * b).to_f64() + 1.5).abs() < 1e-15);
        assert!(((a / b).to_f64() + 6.0).abs() < 1e-14);
        assert!((a * LogMagnitude::zero()).is_zero());
        assert_eq!(LogMagnitude::from_real(0.0), LogMagnitude::zero());
        assert_eq!(LogMagnitude::zero().to_complex(), c(0.0));
        assert!((a.powi(3).to_f64() + 27.0).abs() < 1e-12);
    }

    #[test]
    fn e_n_orthonormal_through_moments() {
        // e_n with monomial coefficients, paired through gaussian_moment (sigma = 1)
        let inner = |n: usize, m: usize| {
            let norm = |k: usize| {
                ((2f64).powi(k as i32) * ln_factorials(k)[k].exp() * PI.sqrt()).sqrt()
            };
            let p = hermite_coeffs(n).unwrap();
            let q = hermite_coeffs(m).unwrap();
            let mut acc = c(0.0);
            for (i, a) in p.coeffs().iter().enumerate() {
                for (j, b) in q.coeffs().iter().enumerate() {
                    acc += a.conj() * b * gaussian_moment(i + j, c(1.0)).unwrap();
                }
            }
            acc / (norm(n) * norm(m))
        };
        assert!((inner(3, 3).re - 1.0).abs() < 1e-12);
        assert!(inner(2, 4).norm() < 1e-12);
    }
}
