//! Closed-form squared norms of the eigenfamilies and their large-n behavior.
//!
//! The closed forms hold for real parameters with `beta > delta >= 0` and
//! `gamma > alpha >= 0`; anything else is left to the oracle. Norms grow or
//! shrink geometrically in `n` and are always returned as [`LogMagnitude`].
//!
//! Notation: `A = alpha beta - gamma delta`,
//! `s = 1/sqrt((beta^2 - delta^2)(gamma^2 - alpha^2))`,
//! `x = (1 + |A|)/(beta^2 - delta^2)` and `y = (1 + |A|)/(gamma^2 - alpha^2)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::eigensystem::{build_family_with, EigenError, NormalizationConvention};
use crate::gbt::{GbtParams, ANOMALY_TOL};
use crate::oracle::{quad_inner, OracleError, Probe, QuadratureSpec};
use crate::specialfns::{
    legendre_eval, legendre_eval_complex, ln_factorials, LogMagnitude, SpecialFnError, LEGENDRE_DOMAIN_TOL,
};

/// `|x - 1|` below which a growth base counts as 1.
pub const BOUNDARY_TOL: f64 = 1e-12;

const DEGENERATE_TOL: f64 = 1e-14;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NormsError {
    #[error("closed forms need real parameters with beta > delta >= 0 and gamma > alpha >= 0; use the oracle")]
    UseOracle,
    #[error("{what}: {value}")]
    Consistency { what: &'static str, value: f64 },
    #[error("|alpha beta - gamma delta| = {anomaly} must be < 1")]
    AnomalyTooLarge { anomaly: f64 },
    #[error("alpha beta - gamma delta = {anomaly} is not zero")]
    NotConstrained { anomaly: f64 },
    #[error(transparent)]
    Special(#[from] SpecialFnError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Eigen(#[from] EigenError),
}

/// `\int_0^\infty e^{-p x^2} H_n(b x) H_n(c x) dx
///  = 2^{n-1} n! sqrt(pi) p^{-(n+1)/2} (b^2+c^2-p)^{n/2} P_n(b c / sqrt(p (b^2+c^2-p)))`.
///
/// Real arguments use the real Legendre recurrence and require its argument
/// to be at least 1 in absolute value. When `b^2 + c^2 = p` the limit
/// through the leading coefficient of `P_n` is taken.
pub fn prudnikov_halfline(p: Complex64, b: Complex64, c: Complex64, n: usize) -> Result<LogMagnitude, NormsError> {
    if !(p.re > 0.0) {
        return Err(SpecialFnError::Domain {
            what: "prudnikov_halfline requires Re p > 0",
            value: p.re,
        }
        .into());
    }
    let sqrt_p = p.sqrt();
    if n == 0 {
        return Ok(LogMagnitude::from_ln(0.5 * PI.ln() - 2f64.ln()) * LogMagnitude::from_complex(sqrt_p).powi(-1));
    }
    let ln_fact = ln_factorials(2 * n);
    let nf = n as f64;
    let q = b * b + c * c - p;
    let scale = (b * b).norm() + (c * c).norm() + p.norm();

    if q.norm() <= DEGENERATE_TOL * scale {
        // (2n)!/(2^n n!^2) is the leading coefficient of P_n
        let ln = 0.5 * PI.ln() + ln_fact[2 * n] - ln_fact[n] - 2f64.ln();
        let lead = LogMagnitude::from_ln(ln);
        let power = LogMagnitude::from_complex(b * c / sqrt_p).powi(n as i32);
        return Ok(lead * power * LogMagnitude::from_complex(sqrt_p).powi(-(n as i32) - 1));
    }

    let prefactor = LogMagnitude::from_ln((nf - 1.0) * 2f64.ln() + ln_fact[n] + 0.5 * PI.ln())
        * LogMagnitude::from_complex(sqrt_p).powi(-(n as i32) - 1);

    let all_real = [p, b, c].iter().all(|z| z.im == 0.0);
    if all_real && q.re > 0.0 {
        let arg = b.re * c.re / (p.re * q.re).sqrt();
        if arg.abs() < 1.0 - LEGENDRE_DOMAIN_TOL {
            return Err(NormsError::Consistency {
                what: "real Legendre argument below 1",
                value: arg,
            });
        }
        let mut leg = legendre_eval(n, arg.abs())?;
        if arg < 0.0 && n % 2 == 1 {
            leg = leg * LogMagnitude::from_real(-1.0);
        }
        let q_pow = LogMagnitude::from_ln(0.5 * nf * q.re.ln());
        return Ok(prefactor * q_pow * leg);
    }

    // sqrt(p q) is split as sqrt(p) sqrt(q) so that the odd powers of
    // sqrt(q) cancel between the two factors whatever the branch
    let sqrt_q = q.sqrt();
    let arg = b * c / (sqrt_p * sqrt_q);
    let leg = legendre_eval_complex(n, arg);
    Ok(prefactor * LogMagnitude::from_complex(sqrt_q).powi(n as i32) * leg)
}

/// Real parts of `(alpha, beta, gamma, delta)` after checking the regime.
fn ordered_parts(params: &GbtParams) -> Result<(f64, f64, f64, f64), NormsError> {
    if !params.is_real_ordered() {
        return Err(NormsError::UseOracle);
    }
    let parts = (params.alpha().re, params.beta().re, params.gamma().re, params.delta().re);
    let anomaly = params.anomaly().re.abs();
    if anomaly >= 1.0 {
        return Err(NormsError::AnomalyTooLarge { anomaly });
    }
    Ok(parts)
}

fn anomaly_vanishes(params: &GbtParams) -> bool {
    params.anomaly().norm() <= ANOMALY_TOL
}

/// `s = 1/sqrt((beta^2 - delta^2)(gamma^2 - alpha^2))`, exactly 1 when the
/// anomaly vanishes.
fn legendre_argument(params: &GbtParams) -> Result<f64, NormsError> {
    let (a, b, g, d) = ordered_parts(params)?;
    if anomaly_vanishes(params) {
        return Ok(1.0);
    }
    Ok(1.0 / ((b * b - d * d) * (g * g - a * a)).sqrt())
}

/// `sqrt(pi) |N|^2`, the constant obtained by doubling the half-line integral.
pub fn derived_prefactor(n: Complex64) -> f64 {
    PI.sqrt() * n.norm_sqr()
}

/// Half of [`derived_prefactor`], the value a half-line integral alone gives.
pub fn halved_prefactor(n: Complex64) -> f64 {
    derived_prefactor(n) / 2.0
}

/// `||phi_n||^2` without the constant:
/// `((a+g)/(b+d))^n ((b+d)/(b-d))^{(n+1)/2} ((g-a)/(g+a))^{n/2} P_n(s)`.
fn phi_shape(params: &GbtParams, n: usize) -> Result<LogMagnitude, NormsError> {
    let (a, b, g, d) = ordered_parts(params)?;
    let nf = n as f64;
    let ln = nf * ((a + g) / (b + d)).ln()
        + 0.5 * (nf + 1.0) * ((b + d) / (b - d)).ln()
        + 0.5 * nf * ((g - a) / (g + a)).ln();
    Ok(LogMagnitude::from_ln(ln) * legendre_eval(n, legendre_argument(params)?)?)
}

/// `||Psi_n||^2` without the constant:
/// `((d+b)/(g+a))^n ((g+a)/(g-a))^{(n+1)/2} ((b-d)/(b+d))^{n/2} P_n(s)`.
fn psi_shape(params: &GbtParams, n: usize) -> Result<LogMagnitude, NormsError> {
    let (a, b, g, d) = ordered_parts(params)?;
    let nf = n as f64;
    let ln = nf * ((d + b) / (g + a)).ln()
        + 0.5 * (nf + 1.0) * ((g + a) / (g - a)).ln()
        + 0.5 * nf * ((b - d) / (b + d)).ln();
    Ok(LogMagnitude::from_ln(ln) * legendre_eval(n, legendre_argument(params)?)?)
}

/// Closed-form `||phi_n||^2` with the derived constant `sqrt(pi) |N_phi|^2`.
pub fn norm_sq_phi(
    params: &GbtParams,
    n: usize,
    convention: &NormalizationConvention,
) -> Result<LogMagnitude, NormsError> {
    Ok(LogMagnitude::from_ln(derived_prefactor(convention.n_phi).ln()) * phi_shape(params, n)?)
}

/// Closed-form `||Psi_n||^2` with the derived constant `sqrt(pi) |N_psi|^2`.
pub fn norm_sq_psi(
    params: &GbtParams,
    n: usize,
    convention: &NormalizationConvention,
) -> Result<LogMagnitude, NormsError> {
    Ok(LogMagnitude::from_ln(derived_prefactor(convention.n_psi).ln()) * psi_shape(params, n)?)
}

fn require_constrained(params: &GbtParams) -> Result<(f64, f64, f64, f64), NormsError> {
    let parts = ordered_parts(params)?;
    if !anomaly_vanishes(params) {
        return Err(NormsError::NotConstrained {
            anomaly: params.anomaly().norm(),
        });
    }
    Ok(parts)
}

/// `||phi_n||^2 = sqrt(pi) |N_phi|^2 sqrt((b+d)/(b-d)) (g/b)^n` when `A = 0`.
pub fn norm_sq_phi_constrained(
    params: &GbtParams,
    n: usize,
    convention: &NormalizationConvention,
) -> Result<LogMagnitude, NormsError> {
    let (_, b, g, d) = require_constrained(params)?;
    let ln = derived_prefactor(convention.n_phi).ln() + 0.5 * ((b + d) / (b - d)).ln() + n as f64 * (g / b).ln();
    Ok(LogMagnitude::from_ln(ln))
}

/// `||Psi_n||^2 = sqrt(pi) |N_psi|^2 sqrt((g+a)/(g-a)) (b/g)^n` when `A = 0`.
pub fn norm_sq_psi_constrained(
    params: &GbtParams,
    n: usize,
    convention: &NormalizationConvention,
) -> Result<LogMagnitude, NormsError> {
    let (a, b, g, _) = require_constrained(params)?;
    let ln = derived_prefactor(convention.n_psi).ln() + 0.5 * ((g + a) / (g - a)).ln() + n as f64 * (b / g).ln();
    Ok(LogMagnitude::from_ln(ln))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormSource {
    ClosedForm,
    Oracle,
}

impl NormSource {
    pub fn as_str(&self) -> &'static str {
        match self {
            NormSource::ClosedForm => "closed_form",
            NormSource::Oracle => "oracle",
        }
    }
}

/// `||phi_n||^2` and `||Psi_n||^2` for `n = 0..=n_max`, in log scale.
#[derive(Debug, Clone, PartialEq)]
pub struct NormSeries {
    params: GbtParams,
    convention: NormalizationConvention,
    phi: Vec<LogMagnitude>,
    psi: Vec<LogMagnitude>,
    source: NormSource,
}

impl NormSeries {
    pub fn new(
        params: GbtParams,
        convention: NormalizationConvention,
        phi: Vec<LogMagnitude>,
        psi: Vec<LogMagnitude>,
        source: NormSource,
    ) -> Self {
        debug_assert_eq!(phi.len(), psi.len());
        Self {
            params,
            convention,
            phi,
            psi,
            source,
        }
    }

    pub fn params(&self) -> &GbtParams {
        &self.params
    }
    pub fn convention(&self) -> &NormalizationConvention {
        &self.convention
    }
    pub fn source(&self) -> NormSource {
        self.source
    }
    pub fn len(&self) -> usize {
        self.phi.len()
    }
    pub fn is_empty(&self) -> bool {
        self.phi.is_empty()
    }
    pub fn phi(&self) -> &[LogMagnitude] {
        &self.phi
    }
    pub fn psi(&self) -> &[LogMagnitude] {
        &self.psi
    }
    pub fn ln_phi(&self, n: usize) -> f64 {
        self.phi[n].ln_abs()
    }
    pub fn ln_psi(&self, n: usize) -> f64 {
        self.psi[n].ln_abs()
    }
    /// `ln(||phi_n||^2 ||Psi_n||^2)`, independent of the convention.
    pub fn ln_product(&self, n: usize) -> f64 {
        self.ln_phi(n) + self.ln_psi(n)
    }

    pub fn all_finite(&self) -> bool {
        self.phi.iter().chain(&self.psi).all(|m| m.ln_abs().is_finite())
    }
}

/// Closed-form series with the derived constants.
pub fn closed_form_series(
    params: &GbtParams,
    convention: &NormalizationConvention,
    n_max: usize,
) -> Result<NormSeries, NormsError> {
    let mut phi = Vec::with_capacity(n_max + 1);
    let mut psi = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        phi.push(norm_sq_phi(params, n, convention)?);
        psi.push(norm_sq_psi(params, n, convention)?);
    }
    Ok(NormSeries::new(*params, *convention, phi, psi, NormSource::ClosedForm))
}

/// The n-independent constant measured against quadrature at `n = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CalibrationRecord {
    pub measured: f64,
    /// `sqrt(pi) |N|^2`.
    pub derived: f64,
    /// `sqrt(pi) |N|^2 / 2`.
    pub halved: f64,
    pub rel_dev_derived: f64,
    pub rel_dev_halved: f64,
    pub oracle_error: f64,
}

impl CalibrationRecord {
    fn new(measured: f64, oracle_error: f64, n: Complex64) -> Self {
        let derived = derived_prefactor(n);
        let halved = halved_prefactor(n);
        Self {
            measured,
            derived,
            halved,
            rel_dev_derived: (measured - derived).abs() / derived,
            rel_dev_halved: (measured - halved).abs() / halved,
            oracle_error,
        }
    }
}

/// Closed-form norms whose constants come from the oracle.
#[derive(Debug, Clone)]
pub struct NormCalculator {
    params: GbtParams,
    convention: NormalizationConvention,
    phi: CalibrationRecord,
    psi: CalibrationRecord,
}

impl NormCalculator {
    pub fn calibrate(
        params: &GbtParams,
        convention: NormalizationConvention,
        spec: &QuadratureSpec,
    ) -> Result<Self, NormsError> {
        ordered_parts(params)?;
        let family = build_family_with(params, convention, 0)?;
        let measure = |f, shape: LogMagnitude, n| -> Result<CalibrationRecord, NormsError> {
            let probe = Probe::Gauss(f);
            let q = quad_inner(&probe, &probe, spec)?;
            let shape = shape.to_f64();
            Ok(CalibrationRecord::new(q.value.re / shape, q.error / shape, n))
        };
        let phi = measure(family.phi(0).clone(), phi_shape(params, 0)?, convention.n_phi)?;
        let psi = measure(family.psi(0).clone(), psi_shape(params, 0)?, convention.n_psi)?;
        Ok(Self {
            params: *params,
            convention,
            phi,
            psi,
        })
    }

    pub fn phi_calibration(&self) -> &CalibrationRecord {
        &self.phi
    }
    pub fn psi_calibration(&self) -> &CalibrationRecord {
        &self.psi
    }

    pub fn norm_sq_phi(&self, n: usize) -> Result<LogMagnitude, NormsError> {
        Ok(LogMagnitude::from_ln(self.phi.measured.ln()) * phi_shape(&self.params, n)?)
    }

    pub fn norm_sq_psi(&self, n: usize) -> Result<LogMagnitude, NormsError> {
        Ok(LogMagnitude::from_ln(self.psi.measured.ln()) * psi_shape(&self.params, n)?)
    }

    pub fn series(&self, n_max: usize) -> Result<NormSeries, NormsError> {
        let mut phi = Vec::with_capacity(n_max + 1);
        let mut psi = Vec::with_capacity(n_max + 1);
        for n in 0..=n_max {
            phi.push(self.norm_sq_phi(n)?);
            psi.push(self.norm_sq_psi(n)?);
        }
        Ok(NormSeries::new(
            self.params,
            self.convention,
            phi,
            psi,
            NormSource::ClosedForm,
        ))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Trend {
    Diverges,
    Vanishes,
    Bounded,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AsymptoticsReport {
    pub anomaly: f64,
    pub x: f64,
    pub y: f64,
    pub s: f64,
    /// `(2 pi)^{-1/2} (s^2-1)^{-1/4} (s + sqrt(s^2-1))^{1/2}`; absent when
    /// `s = 1`, where `P_n(s) = 1` exactly.
    pub a_const: Option<f64>,
    /// `||phi_n||^2 ~ a_phi x^n / sqrt(n)` (exactly `a_phi x^n` when `s = 1`).
    pub a_phi: f64,
    pub a_psi: f64,
    pub product_base: f64,
    pub phi_trend: Trend,
    pub psi_trend: Trend,
    pub product_trend: Trend,
}

fn trend(base: f64, exact_power: bool) -> Trend {
    if (base - 1.0).abs() <= BOUNDARY_TOL {
        // with the 1/sqrt(n) factor present a unit base still decays
        if exact_power {
            Trend::Bounded
        } else {
            Trend::Vanishes
        }
    } else if base > 1.0 {
        Trend::Diverges
    } else {
        Trend::Vanishes
    }
}

pub fn asymptotics(params: &GbtParams, convention: &NormalizationConvention) -> Result<AsymptoticsReport, NormsError> {
    let (a, b, g, d) = ordered_parts(params)?;
    let anomaly = params.anomaly().re.abs();
    let exact = anomaly_vanishes(params);
    let anomaly = if exact { 0.0 } else { anomaly };
    let x = (1.0 + anomaly) / (b * b - d * d);
    let y = (1.0 + anomaly) / (g * g - a * a);
    let s = legendre_argument(params)?;
    let a_const = if exact {
        None
    } else {
        let w = (s - 1.0) * (s + 1.0);
        Some((2.0 * PI).powf(-0.5) * w.powf(-0.25) * (s + w.sqrt()).sqrt())
    };
    let a_phi = derived_prefactor(convention.n_phi) * ((b + d) / (b - d)).sqrt() * a_const.unwrap_or(1.0);
    let a_psi = derived_prefactor(convention.n_psi) * ((g + a) / (g - a)).sqrt() * a_const.unwrap_or(1.0);
    let product_base = x * y;
    let product_trend = if exact {
        trend(product_base, true)
    } else {
        // (xy)^n / n with xy > 1 whenever the anomaly is nonzero
        trend(product_base, false)
    };
    Ok(AsymptoticsReport {
        anomaly,
        x,
        y,
        s,
        a_const,
        a_phi,
        a_psi,
        product_base,
        phi_trend: trend(x, exact),
        psi_trend: trend(y, exact),
        product_trend,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProductTrend {
    /// `ln(||phi_n||^2 ||Psi_n||^2)` for `n = 0..=n_max`.
    pub ln_product: Vec<f64>,
    pub anomaly_vanishes: bool,
    /// `max_n |prod_n / prod_0 - 1|`, when the anomaly vanishes.
    pub relative_variation: Option<f64>,
    /// Inclusive range used for the slope fits.
    pub fit_range: (usize, usize),
    /// Least-squares slope of `ln prod_n`.
    pub fitted_slope: Option<f64>,
    /// Least-squares slope of `ln prod_n + ln n`, removing the `1/n` factor.
    pub corrected_slope: Option<f64>,
    /// `ln((1 + |A|)/(1 - |A|))`.
    pub expected_slope: f64,
}

fn ls_slope(points: impl Iterator<Item = (f64, f64)> + Clone) -> Option<f64> {
    let count = points.clone().count() as f64;
    if count < 2.0 {
        return None;
    }
    let (sx, sy) = points.clone().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (mx, my) = (sx / count, sy / count);
    let (num, den) = points.fold((0.0, 0.0), |(n, d), (x, y)| (n + (x - mx) * (y - my), d + (x - mx) * (x - mx)));
    Some(num / den)
}

/// Behavior of `||phi_n||^2 ||Psi_n||^2` over `n <= n_max`.
pub fn norm_product_trend(params: &GbtParams, n_max: usize) -> Result<ProductTrend, NormsError> {
    ordered_parts(params)?;
    let convention = NormalizationConvention::default_for(params);
    let series = closed_form_series(params, &convention, n_max)?;
    let ln_product: Vec<f64> = (0..=n_max).map(|n| series.ln_product(n)).collect();
    let vanishes = anomaly_vanishes(params);
    let anomaly = if vanishes { 0.0 } else { params.anomaly().re.abs() };
    let relative_variation = vanishes.then(|| {
        ln_product
            .iter()
            .map(|l| (l - ln_product[0]).exp_m1().abs())
            .fold(0.0, f64::max)
    });
    let fit_range = (n_max / 4, n_max);
    let points = (fit_range.0.max(1)..=fit_range.1).map(|n| (n as f64, ln_product[n]));
    let fitted_slope = ls_slope(points.clone());
    let corrected_slope = ls_slope(points.map(|(n, l)| (n, l + n.ln())));
    Ok(ProductTrend {
        ln_product,
        anomaly_vanishes: vanishes,
        relative_variation,
        fit_range,
        fitted_slope,
        corrected_slope,
        expected_slope: ((1.0 + anomaly) / (1.0 - anomaly)).ln(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gbt::{constrained_family, presets, swanson, SwansonParams};
    use crate::oracle::{halfline_hermite_product, quad_norm_series};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn prudnikov_low_orders() {
        for p in [0.3, 1.0, 4.0] {
            let v = prudnikov_halfline(c(p), c(0.7), c(1.3), 0).unwrap().to_f64();
            assert!(rel(v, PI.sqrt() / (2.0 * p.sqrt())) < 1e-14);
        }
        let v = prudnikov_halfline(c(1.0), c(1.0), c(1.0), 1).unwrap().to_f64();
        assert!(rel(v, PI.sqrt()) < 1e-14);
    }

    #[test]
    fn prudnikov_against_quadrature() {
        let spec = QuadratureSpec::adaptive();
        let cases = [
            (c(1.0 / 7.0), c((9.0f64 / 35.0).sqrt()), c((9.0f64 / 35.0).sqrt()), 5),
            (c(1.0 / 7.0), c((6.0f64 / 35.0).sqrt()), c((6.0f64 / 35.0).sqrt()), 12),
            (c(0.8), c(0.3), c(0.4), 4),
            (Complex64::new(1.0, 0.4), Complex64::new(0.9, -0.2), Complex64::new(0.6, 0.3), 6),
        ];
        for (p, b, cc, n) in cases {
            let closed = prudnikov_halfline(p, b, cc, n).unwrap().to_complex();
            let quad = halfline_hermite_product(p, b, cc, n, &spec).unwrap().value;
            assert!((closed - quad).norm() < 1e-8 * quad.norm(), "{p} {b} {cc} {n}: {closed} vs {quad}");
        }
    }

    #[test]
    fn prudnikov_degenerate_limit() {
        // b^2 + c^2 = p
        let (b, cc) = (0.6, 0.8);
        let v = prudnikov_halfline(c(1.0), c(b), c(cc), 3).unwrap().to_f64();
        let q = halfline_hermite_product(c(1.0), c(b), c(cc), 3, &QuadratureSpec::adaptive())
            .unwrap()
            .value
            .re;
        assert!(rel(v, q) < 1e-10);
    }

    #[test]
    fn prudnikov_domain() {
        assert!(prudnikov_halfline(c(-1.0), c(1.0), c(1.0), 2).is_err());
        assert!(matches!(
            prudnikov_halfline(c(1.0), c(0.5), c(2.0), 2),
            Err(NormsError::Consistency { .. })
        ));
    }

    #[test]
    fn closed_form_is_doubled_halfline_integral() {
        let p = presets::scenario_d();
        let conv = NormalizationConvention::default_for(&p);
        let kappa = p.phi_exponent();
        let b = Complex64::new(1.0, 0.0) / p.width_product().sqrt();
        let ratio = ((p.alpha() + p.gamma()) / (p.beta() + p.delta())).re;
        let ln_fact = ln_factorials(30);
        for n in [0, 1, 7, 30] {
            let half = prudnikov_halfline(kappa, b, b, n).unwrap();
            let ln = 2f64.ln() + n as f64 * ratio.ln() - n as f64 * 2f64.ln() - ln_fact[n] + half.ln_abs();
            let direct = norm_sq_phi(&p, n, &conv).unwrap().ln_abs();
            assert!((ln - direct).abs() < 1e-12, "n={n}");
        }
    }

    #[test]
    fn case_d_ground_norm() {
        let p = presets::scenario_d();
        let conv = NormalizationConvention::default_for(&p);
        let v = norm_sq_phi(&p, 0, &conv).unwrap().to_f64();
        assert!(rel(v, (7.0 * PI).sqrt()) < 1e-14);
        let v = norm_sq_psi(&p, 0, &conv).unwrap().to_f64();
        assert!(rel(v, conv.n_psi.norm_sqr() * (5.0 * PI).sqrt()) < 1e-14);
    }

    #[test]
    fn calibration_picks_derived_constant() {
        let p = presets::scenario_d();
        let calc = NormCalculator::calibrate(&p, NormalizationConvention::default_for(&p), &QuadratureSpec::default())
            .unwrap();
        assert!(calc.phi_calibration().rel_dev_derived < 1e-12);
        assert!(calc.psi_calibration().rel_dev_derived < 1e-12);
        assert!((calc.phi_calibration().rel_dev_halved - 1.0).abs() < 1e-10);
    }

    #[test]
    fn closed_form_matches_oracle() {
        for p in [presets::scenario_d(), constrained_family(2.0, 1.0).unwrap()] {
            let conv = NormalizationConvention::default_for(&p);
            let fam = crate::eigensystem::build_family(&p, 60).unwrap();
            let oracle = quad_norm_series(&fam, 60, &QuadratureSpec::default()).unwrap();
            let closed = closed_form_series(&p, &conv, 60).unwrap();
            for n in 0..=60 {
                let tol = if n <= 20 { 1e-8 } else { 1e-6 };
                assert!((oracle.ln_phi(n) - closed.ln_phi(n)).abs() < tol, "phi n={n}");
                assert!((oracle.ln_psi(n) - closed.ln_psi(n)).abs() < tol, "psi n={n}");
            }
        }
    }

    #[test]
    fn constrained_collapse() {
        let p = constrained_family(2.0, 1.0).unwrap();
        let conv = NormalizationConvention::default_for(&p);
        for n in 0..=100 {
            let general = norm_sq_phi(&p, n, &conv).unwrap().ln_abs();
            let special = norm_sq_phi_constrained(&p, n, &conv).unwrap().ln_abs();
            assert!((general - special).abs() < 1e-12);
            let general = norm_sq_psi(&p, n, &conv).unwrap().ln_abs();
            let special = norm_sq_psi_constrained(&p, n, &conv).unwrap().ln_abs();
            assert!((general - special).abs() < 1e-12);
        }
        let r = norm_sq_phi(&p, 1, &conv).unwrap() / norm_sq_phi(&p, 0, &conv).unwrap();
        assert!(rel(r.to_f64(), 1.0 / 3.0) < 1e-13);
        assert!(norm_sq_phi_constrained(&presets::scenario_d(), 1, &conv).is_err());
    }

    #[test]
    fn regime_gate() {
        let s = swanson(SwansonParams::new(0.3).unwrap());
        let conv = NormalizationConvention::default_for(&s);
        assert_eq!(norm_sq_phi(&s, 1, &conv), Err(NormsError::UseOracle));
        assert!(asymptotics(&s, &conv).is_err());
    }

    #[test]
    fn case_d_asymptotics() {
        let p = presets::scenario_d();
        let r = asymptotics(&p, &NormalizationConvention::default_for(&p)).unwrap();
        assert!((r.x - 2.0 / 3.0).abs() < 1e-12);
        assert!((r.y - 2.1).abs() < 1e-12);
        assert!((r.product_base - 1.4).abs() < 1e-12);
        assert!((r.s - 6.0 / 35f64.sqrt()).abs() < 1e-12);
        assert_eq!(r.phi_trend, Trend::Vanishes);
        assert_eq!(r.psi_trend, Trend::Diverges);
        assert_eq!(r.product_trend, Trend::Diverges);
    }

    #[test]
    fn three_case_table() {
        let cases = [
            (2f64.sqrt(), Trend::Bounded, Trend::Bounded),
            (1.2, Trend::Diverges, Trend::Vanishes),
            (2.0, Trend::Vanishes, Trend::Diverges),
        ];
        for (beta, phi, psi) in cases {
            let p = constrained_family(beta, 1.0).unwrap();
            let r = asymptotics(&p, &NormalizationConvention::default_for(&p)).unwrap();
            assert_eq!((r.phi_trend, r.psi_trend, r.product_trend), (phi, psi, Trend::Bounded), "beta={beta}");
        }
    }

    #[test]
    fn product_trends() {
        let t = norm_product_trend(&constrained_family(1.2, 1.0).unwrap(), 100).unwrap();
        assert!(t.relative_variation.unwrap() < 1e-10);
        let t = norm_product_trend(&GbtParams::standard_bosons(), 20).unwrap();
        assert!(t.ln_product.iter().all(|l| l.abs() < 1e-13));
        let t = norm_product_trend(&presets::scenario_d(), 200).unwrap();
        assert!((t.fitted_slope.unwrap() - 1.4f64.ln()).abs() < 1e-2);
        assert!((t.corrected_slope.unwrap() - 1.4f64.ln()).abs() < 1e-3);
    }
}
