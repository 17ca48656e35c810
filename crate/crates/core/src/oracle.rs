//! Independent quadrature for every integral the closed forms claim.
//!
//! Two rules: Gauss-Hermite nodes rescaled to the Gaussian width of a product
//! of two [`GaussPoly`]s, and a composite 16-point Gauss-Legendre rule on a
//! truncated interval for everything else. Both report
//! `|Q(N) - Q(2N)|` as their error estimate.

use std::f64::consts::PI;
use std::fmt;
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::eigensystem::EigenFamily;
use crate::gausspoly::GaussPoly;
use crate::norms::{NormSeries, NormSource};
use crate::specialfns::LogMagnitude;

pub const MIN_NODES: usize = 16;
pub const MAX_HERMITE_NODES: usize = 2048;
/// Integrand magnitude at the truncation boundary, relative to its peak.
pub const BOUNDARY_REL: f64 = 1e-18;

const MAX_RADIUS: f64 = 1e6;
const MAX_PANELS: usize = 1 << 16;
const PEAK_SAMPLES: usize = 4096;
const PANEL_WIDTH: f64 = 0.5;
const LEGENDRE_POINTS: usize = 16;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("integrand does not decay: boundary test still failing at radius {radius}")]
    NonDecaying { radius: f64 },
    #[error("invalid quadrature spec: {0}")]
    InvalidSpec(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuadratureRule {
    ScaledHermiteGauss,
    AdaptiveTruncated,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub rule: QuadratureRule,
    /// Minimum node count; Gauss-Hermite raises it to cover the degree.
    pub node_count: usize,
    /// Initial truncation radius for the composite rule, grown until the
    /// boundary test passes.
    pub truncation_radius: f64,
    pub target_rel_tol: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            rule: QuadratureRule::ScaledHermiteGauss,
            node_count: 32,
            truncation_radius: 8.0,
            target_rel_tol: 1e-13,
        }
    }
}

impl QuadratureSpec {
    pub fn adaptive() -> Self {
        Self {
            rule: QuadratureRule::AdaptiveTruncated,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), OracleError> {
        if self.node_count < MIN_NODES {
            return Err(OracleError::InvalidSpec(format!(
                "node_count {} < {MIN_NODES}",
                self.node_count
            )));
        }
        if !(self.truncation_radius > 0.0 && self.truncation_radius.is_finite()) {
            return Err(OracleError::InvalidSpec(format!(
                "truncation_radius {} must be positive",
                self.truncation_radius
            )));
        }
        if !(self.target_rel_tol > 0.0) {
            return Err(OracleError::InvalidSpec(format!(
                "target_rel_tol {} must be positive",
                self.target_rel_tol
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Interval {
    FullLine,
    HalfLine,
}

/// A function the oracle can integrate.
#[derive(Clone)]
pub enum Probe {
    Gauss(GaussPoly),
    Sampled(Arc<dyn Fn(f64) -> Complex64 + Send + Sync>),
}

impl Probe {
    pub fn sampled(f: impl Fn(f64) -> Complex64 + Send + Sync + 'static) -> Self {
        Probe::Sampled(Arc::new(f))
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        match self {
            Probe::Gauss(g) => g.eval(x),
            Probe::Sampled(f) => f(x),
        }
    }
}

impl From<GaussPoly> for Probe {
    fn from(g: GaussPoly) -> Self {
        Probe::Gauss(g)
    }
}

impl fmt::Debug for Probe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Probe::Gauss(g) => f.debug_tuple("Gauss").field(g).finish(),
            Probe::Sampled(_) => f.write_str("Sampled(..)"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadEstimate {
    pub value: Complex64,
    /// `|Q(N) - Q(2N)|`.
    pub error: f64,
    /// Node count (Gauss-Hermite) or panel count (composite) of `value`.
    pub resolution: usize,
}

/// Nodes and weights of an N-point rule.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Gauss-Hermite rule for weight `e^{-t^2}`, with weights returned as
/// `w_i e^{t_i^2}` so that `sum w_i h(t_i)` integrates `h` directly.
pub fn gauss_hermite_scaled(n: usize) -> Result<GaussRule, OracleError> {
    if n == 0 || n > MAX_HERMITE_NODES {
        return Err(OracleError::InvalidSpec(format!(
            "Gauss-Hermite node count {n} outside 1..={MAX_HERMITE_NODES}"
        )));
    }
    let nf = n as f64;
    // Jacobi matrix eigenvalues as starting points, polished by Newton
    let off: Vec<f64> = (1..n).map(|i| (i as f64 / 2.0).sqrt()).collect();
    let mut start = symmetric_tridiagonal_eigenvalues(vec![0.0; n], off);
    start.sort_by(f64::total_cmp);
    let m = n.div_ceil(2);
    let mut roots: Vec<f64> = Vec::with_capacity(m);
    let mut weights: Vec<f64> = Vec::with_capacity(m);
    for &guess in start.iter().rev().take(m) {
        let mut z = if n % 2 == 1 && roots.len() == m - 1 { 0.0 } else { guess.abs() };
        for _ in 0..20 {
            let (p_n, p_nm1, _) = orthonormal_hermite_pair(n, z);
            let step = p_n / ((2.0 * nf).sqrt() * p_nm1);
            z -= step;
            if step.abs() <= 1e-15 * z.abs().max(1.0) {
                break;
            }
        }
        let (_, p_nm1, ln_scale) = orthonormal_hermite_pair(n, z);
        // w e^{t^2} = 1 / (n psi_{n-1}(t)^2), psi carrying e^{-t^2/2}
        let ln_psi = ln_scale + p_nm1.abs().ln() - z * z / 2.0;
        weights.push((-(nf.ln()) - 2.0 * ln_psi).exp());
        roots.push(z);
    }
    let mut pairs: Vec<(f64, f64)> = Vec::with_capacity(n);
    for (i, (&r, &w)) in roots.iter().zip(&weights).enumerate() {
        pairs.push((r, w));
        // for odd n the last root is the one at the origin
        if !(n % 2 == 1 && i == m - 1) {
            pairs.push((-r, w));
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(GaussRule {
        nodes: pairs.iter().map(|p| p.0).collect(),
        weights: pairs.iter().map(|p| p.1).collect(),
    })
}

/// Eigenvalues of the symmetric tridiagonal matrix with diagonal `d` and
/// off-diagonal `e` (implicit QL).
fn symmetric_tridiagonal_eigenvalues(mut d: Vec<f64>, off: Vec<f64>) -> Vec<f64> {
    let n = d.len();
    let mut e = off;
    e.push(0.0);
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                break;
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut early = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    early = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if early {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    d
}

/// `(p_n(t), p_{n-1}(t), ln_scale)` for the orthonormal Hermite polynomials
/// (no Gaussian factor), both divided by `e^{ln_scale}`.
fn orthonormal_hermite_pair(n: usize, t: f64) -> (f64, f64, f64) {
    const BIG: f64 = 1e200;
    let mut p1 = PI.powf(-0.25);
    let mut p2 = 0.0;
    let mut ln_scale = 0.0;
    for j in 1..=n {
        let jf = j as f64;
        let p3 = p2;
        p2 = p1;
        p1 = t * (2.0 / jf).sqrt() * p2 - ((jf - 1.0) / jf).sqrt() * p3;
        if p1.abs() > BIG {
            p1 /= BIG;
            p2 /= BIG;
            ln_scale += BIG.ln();
        }
    }
    (p1, p2, ln_scale)
}

/// Gauss-Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> GaussRule {
    let nf = n as f64;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut deriv = 1.0;
        for _ in 0..100 {
            let mut p1 = 1.0;
            let mut p2 = 0.0;
            for j in 1..=n {
                let jf = j as f64;
                let p3 = p2;
                p2 = p1;
                p1 = ((2.0 * jf - 1.0) * z * p2 - (jf - 1.0) * p3) / jf;
            }
            deriv = nf * (z * p1 - p2) / (z * z - 1.0);
            let step = p1 / deriv;
            z -= step;
            if step.abs() <= 1e-16 {
                break;
            }
        }
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        let w = 2.0 / ((1.0 - z * z) * deriv * deriv);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    GaussRule { nodes, weights }
}

fn legendre16() -> &'static GaussRule {
    static RULE: OnceLock<GaussRule> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(LEGENDRE_POINTS))
}

/// `\int conj(f) g` over the real line.
pub fn quad_inner(f: &Probe, g: &Probe, spec: &QuadratureSpec) -> Result<QuadEstimate, OracleError> {
    quad_inner_on(f, g, spec, Interval::FullLine)
}

/// `\int conj(f) g` over the full or half line.
pub fn quad_inner_on(
    f: &Probe,
    g: &Probe,
    spec: &QuadratureSpec,
    interval: Interval,
) -> Result<QuadEstimate, OracleError> {
    spec.validate()?;
    match (f, g, spec.rule, interval) {
        (Probe::Gauss(a), Probe::Gauss(b), QuadratureRule::ScaledHermiteGauss, Interval::FullLine) => {
            hermite_inner(a, b, spec)
        }
        _ => {
            let h = |x: f64| f.eval(x).conj() * g.eval(x);
            quad_integral(&h, interval, spec)
        }
    }
}

fn hermite_inner(f: &GaussPoly, g: &GaussPoly, spec: &QuadratureSpec) -> Result<QuadEstimate, OracleError> {
    let re_sigma = (f.kappa().conj() + g.kappa()).re / 2.0;
    if !(re_sigma > 0.0) {
        return Err(OracleError::NonDecaying {
            radius: f64::INFINITY,
        });
    }
    let degree = f.degree().unwrap_or(0) + g.degree().unwrap_or(0);
    let n = spec.node_count.max(degree / 2 + 8).min(MAX_HERMITE_NODES / 2);
    let width = 1.0 / re_sigma.sqrt();
    let sum = |rule: &GaussRule| -> Complex64 {
        rule.nodes
            .iter()
            .zip(&rule.weights)
            .map(|(&t, &w)| {
                let x = t * width;
                w * f.eval(x).conj() * g.eval(x)
            })
            .sum::<Complex64>()
            * width
    };
    let coarse = sum(cached_hermite(n)?.as_ref());
    let fine = sum(cached_hermite(2 * n)?.as_ref());
    Ok(QuadEstimate {
        value: fine,
        error: (fine - coarse).norm(),
        resolution: 2 * n,
    })
}

fn cached_hermite(n: usize) -> Result<Arc<GaussRule>, OracleError> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<GaussRule>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(rule) = cache.lock().expect("rule cache poisoned").get(&n) {
        return Ok(Arc::clone(rule));
    }
    let rule = Arc::new(gauss_hermite_scaled(n)?);
    cache
        .lock()
        .expect("rule cache poisoned")
        .insert(n, Arc::clone(&rule));
    Ok(rule)
}

/// Composite Gauss-Legendre integral of `h` over the (truncated) interval.
pub fn quad_integral(
    h: &dyn Fn(f64) -> Complex64,
    interval: Interval,
    spec: &QuadratureSpec,
) -> Result<QuadEstimate, OracleError> {
    spec.validate()?;
    let radius = truncation_radius(h, interval, spec.truncation_radius)?;
    let (lo, hi) = match interval {
        Interval::FullLine => (-radius, radius),
        Interval::HalfLine => (0.0, radius),
    };
    let mut panels = (((hi - lo) / PANEL_WIDTH).ceil() as usize).max(spec.node_count / LEGENDRE_POINTS).max(1);
    let (mut coarse, _) = composite(h, lo, hi, panels);
    loop {
        let (fine, abs_scale) = composite(h, lo, hi, 2 * panels);
        let error = (fine - coarse).norm();
        panels *= 2;
        if error <= spec.target_rel_tol * abs_scale || panels >= MAX_PANELS {
            return Ok(QuadEstimate {
                value: fine,
                error,
                resolution: panels,
            });
        }
        coarse = fine;
    }
}

/// `(\int h, \int |h|)` on `[lo, hi]` with `panels` equal panels.
fn composite(h: &dyn Fn(f64) -> Complex64, lo: f64, hi: f64, panels: usize) -> (Complex64, f64) {
    let rule = legendre16();
    let width = (hi - lo) / panels as f64;
    let half = width / 2.0;
    let mut total = Complex64::new(0.0, 0.0);
    let mut abs_total = 0.0;
    for p in 0..panels {
        let mid = lo + (p as f64 + 0.5) * width;
        for (&t, &w) in rule.nodes.iter().zip(&rule.weights) {
            let v = h(mid + half * t);
            total += w * v;
            abs_total += w * v.norm();
        }
    }
    (total * half, abs_total * half)
}

/// Smallest radius (growing geometrically from `start`) at which the
/// integrand has fallen below `BOUNDARY_REL` times its sampled peak.
fn truncation_radius(h: &dyn Fn(f64) -> Complex64, interval: Interval, start: f64) -> Result<f64, OracleError> {
    let mut radius = start;
    while radius <= MAX_RADIUS {
        let lo = match interval {
            Interval::FullLine => -radius,
            Interval::HalfLine => 0.0,
        };
        let step = (radius - lo) / PEAK_SAMPLES as f64;
        let peak = (0..=PEAK_SAMPLES)
            .map(|i| h(lo + i as f64 * step).norm())
            .fold(0.0, f64::max);
        let boundary = match interval {
            Interval::FullLine => h(radius).norm().max(h(-radius).norm()),
            Interval::HalfLine => h(radius).norm(),
        };
        if peak == 0.0 || boundary <= BOUNDARY_REL * peak {
            return Ok(radius);
        }
        radius *= 1.5;
    }
    Err(OracleError::NonDecaying { radius })
}

/// `ln ||phi_n||^2` and `ln ||Psi_n||^2` for `n <= n_max` by quadrature only.
pub fn quad_norm_series(
    family: &EigenFamily,
    n_max: usize,
    spec: &QuadratureSpec,
) -> Result<NormSeries, OracleError> {
    let n_max = n_max.min(family.n_max());
    let norm = |f: &GaussPoly| -> Result<LogMagnitude, OracleError> {
        let p = Probe::Gauss(f.clone());
        Ok(LogMagnitude::from_real(quad_inner(&p, &p, spec)?.value.re))
    };
    let mut phi = Vec::with_capacity(n_max + 1);
    let mut psi = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        phi.push(norm(family.phi(n))?);
        psi.push(norm(family.psi(n))?);
    }
    Ok(NormSeries::new(
        *family.params(),
        *family.convention(),
        phi,
        psi,
        NormSource::Oracle,
    ))
}

/// `\int_0^\infty e^{-p x^2} H_n(b x) H_n(c x) dx` by the composite rule.
pub fn halfline_hermite_product(
    p: Complex64,
    b: Complex64,
    c: Complex64,
    n: usize,
    spec: &QuadratureSpec,
) -> Result<QuadEstimate, OracleError> {
    let h = move |x: f64| (-p * x * x).exp() * hermite_complex(n, b * x) * hermite_complex(n, c * x);
    quad_integral(&h, Interval::HalfLine, spec)
}

fn hermite_complex(n: usize, z: Complex64) -> Complex64 {
    let mut prev = Complex64::new(0.0, 0.0);
    let mut cur = Complex64::new(1.0, 0.0);
    for k in 0..n {
        let next = 2.0 * z * cur - 2.0 * k as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}
