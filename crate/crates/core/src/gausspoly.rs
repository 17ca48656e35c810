//! Exact algebra on functions `p(x) exp(-kappa x^2 / 2)`.
//!
//! The polynomial part is stored in the normalized Hermite basis
//! `h_k(lambda x) = H_k(lambda x) / sqrt(2^k k! sqrt(pi))` for a per-function
//! complex scale `lambda`. In that basis multiplication by `x` and `d/dx` are
//! three-term updates, and inner products reduce to Hermite orthogonality
//! after a complex rescaling of the integration variable. Monomial
//! coefficients are available through [`GaussPoly::monomial_coeffs`] for low
//! degrees, but nothing on the numerical path goes through them: for degree
//! 30 and above the alternating monomial coefficients of `H_n` cancel to the
//! point of losing every digit.

use std::f64::consts::PI;

use num_complex::Complex64;
use thiserror::Error;

use crate::specialfns::{hermite_coeffs, ln_factorials, PolyCoeffs};

const RESCALE_THRESHOLD: f64 = 1e100;

/// Relative coefficient residual below which `commutator_check` accepts
/// `(AB - BA) f` as a multiple of `f`.
pub const PROPORTIONALITY_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GaussPolyError {
    #[error("pairing is not integrable: Re(conj(kappa_f) + kappa_g) = {re_sum} <= 0")]
    NonIntegrable { re_sum: f64 },
    #[error("ladder operator with x-coefficient and d/dx-coefficient both zero")]
    ZeroOperator,
    #[error("hermite scale must be nonzero and finite")]
    InvalidScale,
    #[error("commutator is undefined on the zero function")]
    ZeroFunction,
    #[error("commutator residual {residual:e} is not proportional to f")]
    NotProportional { residual: f64 },
}

fn czero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

/// `p(x) exp(-kappa x^2 / 2)` with `p` expanded in `h_k(scale * x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussPoly {
    poly: PolyCoeffs,
    scale: Complex64,
    kappa: Complex64,
}

impl GaussPoly {
    /// `coeffs[k]` multiplies `h_k(scale * x)`.
    pub fn new(
        coeffs: Vec<Complex64>,
        scale: Complex64,
        kappa: Complex64,
    ) -> Result<Self, GaussPolyError> {
        if scale.norm() == 0.0 || !scale.re.is_finite() || !scale.im.is_finite() {
            return Err(GaussPolyError::InvalidScale);
        }
        Ok(Self {
            poly: PolyCoeffs::new(coeffs),
            scale,
            kappa,
        })
    }

    pub fn zero(kappa: Complex64) -> Self {
        Self {
            poly: PolyCoeffs::zero(),
            scale: Complex64::new(1.0, 0.0),
            kappa,
        }
    }

    /// `amplitude * exp(-kappa x^2 / 2)`.
    pub fn gaussian(amplitude: Complex64, kappa: Complex64) -> Self {
        Self::with_hermite_coeff(0, amplitude * PI.powf(0.25), Complex64::new(1.0, 0.0), kappa)
    }

    /// A single basis term `coeff * h_n(scale x) exp(-kappa x^2/2)`.
    pub(crate) fn with_hermite_coeff(
        n: usize,
        coeff: Complex64,
        scale: Complex64,
        kappa: Complex64,
    ) -> Self {
        let mut coeffs = vec![czero(); n + 1];
        coeffs[n] = coeff;
        Self {
            poly: PolyCoeffs::new(coeffs),
            scale,
            kappa,
        }
    }

    /// Oscillator eigenfunction `e_n`.
    pub fn hermite_basis(n: usize) -> Self {
        let one = Complex64::new(1.0, 0.0);
        Self::with_hermite_coeff(n, one, one, one)
    }

    /// Build from ascending monomial coefficients of `p(x)`.
    pub fn from_monomial(coeffs: &[Complex64], kappa: Complex64) -> Self {
        // Horner in the h_k(x) basis: q <- x q + c_j, with 1 = pi^{1/4} h_0
        let mut q = Self::zero(kappa);
        for &c in coeffs.iter().rev() {
            q = q.mul_x();
            let mut v = q.poly.into_vec();
            if v.is_empty() {
                v.push(czero());
            }
            v[0] += c * PI.powf(0.25);
            q.poly = PolyCoeffs::new(v);
        }
        q
    }

    pub fn from_real_monomial(coeffs: &[f64], kappa: f64) -> Self {
        let c: Vec<_> = coeffs.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        Self::from_monomial(&c, Complex64::new(kappa, 0.0))
    }

    pub fn poly(&self) -> &PolyCoeffs {
        &self.poly
    }

    pub fn coeffs(&self) -> &[Complex64] {
        self.poly.coeffs()
    }

    pub fn scale(&self) -> Complex64 {
        self.scale
    }

    pub fn kappa(&self) -> Complex64 {
        self.kappa
    }

    pub fn degree(&self) -> Option<usize> {
        self.poly.degree()
    }

    pub fn is_zero(&self) -> bool {
        self.poly.is_zero()
    }

    pub fn is_square_integrable(&self) -> bool {
        self.is_zero() || self.kappa.re > 0.0
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs().iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Ascending monomial coefficients of the polynomial part. Exact algebra
    /// but numerically useful only for low degrees (see module docs).
    pub fn monomial_coeffs(&self) -> PolyCoeffs {
        let Some(deg) = self.degree() else {
            return PolyCoeffs::zero();
        };
        let ln_fact = ln_factorials(deg);
        let mut out = vec![czero(); deg + 1];
        for (k, &a) in self.coeffs().iter().enumerate() {
            if a == czero() {
                continue;
            }
            let norm = (0.5 * (k as f64 * 2f64.ln() + ln_fact[k] + 0.5 * PI.ln())).exp();
            let hk = hermite_coeffs(k).expect("degree bounded by caller");
            for (j, &hc) in hk.coeffs().iter().enumerate() {
                out[j] += a * hc * self.scale.powi(j as i32) / norm;
            }
        }
        PolyCoeffs::new(out)
    }

    /// Pointwise value, with the Hermite recurrence rescaled to avoid
    /// overflow before the Gaussian factor is applied.
    pub fn eval(&self, x: f64) -> Complex64 {
        let coeffs = self.coeffs();
        if coeffs.is_empty() {
            return czero();
        }
        let z = self.scale * x;
        let mut prev = czero();
        let mut cur = Complex64::new(PI.powf(-0.25), 0.0);
        let mut sum = coeffs[0] * cur;
        let mut ln_scale = 0.0;
        for (k, &a) in coeffs.iter().enumerate().skip(1) {
            let km = (k - 1) as f64;
            let next = (2.0 / k as f64).sqrt() * z * cur - (km / k as f64).sqrt() * prev;
            prev = cur;
            cur = next;
            sum += a * cur;
            if cur.norm() > RESCALE_THRESHOLD {
                prev /= RESCALE_THRESHOLD;
                cur /= RESCALE_THRESHOLD;
                sum /= RESCALE_THRESHOLD;
                ln_scale += RESCALE_THRESHOLD.ln();
            }
        }
        sum * (Complex64::new(ln_scale, 0.0) - self.kappa * (x * x / 2.0)).exp()
    }

    fn map_coeffs(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self {
            poly: PolyCoeffs::new(self.coeffs().iter().map(|&c| f(c)).collect()),
            scale: self.scale,
            kappa: self.kappa,
        }
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        self.map_coeffs(|c| c * factor)
    }

    /// Multiplication by `x`.
    pub fn mul_x(&self) -> Self {
        self.combine_ladder(Complex64::new(1.0, 0.0), czero())
    }

    /// `d/dx`.
    pub fn derivative(&self) -> Self {
        self.combine_ladder(-self.kappa, self.scale)
    }

    /// `u * x f + v * (polynomial derivative part)`, i.e. the coefficient map
    /// `a_k h_k -> u a_k x h_k + v a_k sqrt(2k) h_{k-1}`.
    fn combine_ladder(&self, u: Complex64, v: Complex64) -> Self {
        let coeffs = self.coeffs();
        if coeffs.is_empty() {
            return self.clone();
        }
        let mut out = vec![czero(); coeffs.len() + 1];
        let u_over = u / self.scale;
        for (k, &a) in coeffs.iter().enumerate() {
            let kf = k as f64;
            out[k + 1] += u_over * a * ((kf + 1.0) / 2.0).sqrt();
            if k > 0 {
                out[k - 1] += u_over * a * (kf / 2.0).sqrt() + v * a * (2.0 * kf).sqrt();
            }
        }
        Self {
            poly: PolyCoeffs::new(out),
            scale: self.scale,
            kappa: self.kappa,
        }
    }

    /// Same function expanded in `h_k(new_scale * x)`.
    pub fn rescaled(&self, new_scale: Complex64) -> Result<Self, GaussPolyError> {
        if new_scale.norm() == 0.0 {
            return Err(GaussPolyError::InvalidScale);
        }
        if new_scale == self.scale {
            return Ok(self.clone());
        }
        let coeffs = expand_rescaled(self.coeffs(), self.scale / new_scale);
        Self::new(coeffs, new_scale, self.kappa)
    }

    /// Coefficients of `self - other` in `self`'s basis. The Gaussian widths
    /// must agree.
    pub fn sub(&self, other: &Self) -> Result<Self, GaussPolyError> {
        let other = other.rescaled(self.scale)?;
        let n = self.coeffs().len().max(other.coeffs().len());
        let out = (0..n)
            .map(|k| self.poly.coeff(k) - other.poly.coeff(k))
            .collect();
        Self::new(out, self.scale, self.kappa)
    }

    /// Largest coefficient difference relative to the larger of the two
    /// coefficient maxima; both functions are compared in `self`'s basis.
    ///
    /// Returns `f64::INFINITY` when the Gaussian widths differ by more than a
    /// relative `1e-12`.
    pub fn coeff_residual(&self, other: &Self) -> f64 {
        let kscale = self.kappa.norm().max(other.kappa.norm()).max(1.0);
        if !self.is_zero() && !other.is_zero() && (self.kappa - other.kappa).norm() > 1e-12 * kscale {
            return f64::INFINITY;
        }
        let other = match other.rescaled(self.scale) {
            Ok(o) => o,
            Err(_) => return f64::INFINITY,
        };
        let n = self.coeffs().len().max(other.coeffs().len());
        let diff = (0..n)
            .map(|k| (self.poly.coeff(k) - other.poly.coeff(k)).norm())
            .fold(0.0, f64::max);
        let reference = self.max_abs_coeff().max(other.max_abs_coeff());
        if reference == 0.0 {
            0.0
        } else {
            diff / reference
        }
    }
}

/// Re-expand `sum_k a_k h_k(r t)` as `sum_m b_m h_m(t)`.
///
/// Multiplication theorem in the normalized basis:
/// `h_k(r t) = sum_i r^{k-2i} ((r^2-1)/2)^i sqrt(k!/(k-2i)!) / i! h_{k-2i}(t)`.
/// Every term is formed in log space so tiny or huge `r^k` do not underflow
/// the remaining factors.
fn expand_rescaled(coeffs: &[Complex64], r: Complex64) -> Vec<Complex64> {
    let n = coeffs.len();
    let mut out = vec![czero(); n];
    if n == 0 {
        return out;
    }
    let ln_fact = ln_factorials(n);
    let ln_r = r.ln();
    let q = (r * r - 1.0) / 2.0;
    let q_is_zero = q.norm() == 0.0;
    let ln_q = if q_is_zero { czero() } else { q.ln() };
    for (k, &a) in coeffs.iter().enumerate() {
        if a == czero() {
            continue;
        }
        let imax = if q_is_zero { 0 } else { k / 2 };
        for i in 0..=imax {
            let j = k - 2 * i;
            let ln_c = ln_r * j as f64
                + ln_q * i as f64
                + Complex64::new(0.5 * (ln_fact[k] - ln_fact[j]) - ln_fact[i], 0.0);
            out[j] += a * ln_c.exp();
        }
    }
    out
}

/// First-order operator `x_coeff * x + d_coeff * d/dx`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LadderOperator {
    x_coeff: Complex64,
    d_coeff: Complex64,
}

impl LadderOperator {
    pub fn new(x_coeff: Complex64, d_coeff: Complex64) -> Result<Self, GaussPolyError> {
        if x_coeff.norm() == 0.0 && d_coeff.norm() == 0.0 {
            return Err(GaussPolyError::ZeroOperator);
        }
        Ok(Self { x_coeff, d_coeff })
    }

    /// `d/dx`.
    pub fn derivative() -> Self {
        Self {
            x_coeff: czero(),
            d_coeff: Complex64::new(1.0, 0.0),
        }
    }

    /// Canonical annihilator `c = (x + d/dx)/sqrt(2)`.
    pub fn annihilation() -> Self {
        let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        Self {
            x_coeff: h,
            d_coeff: h,
        }
    }

    /// Canonical creator `c^dagger = (x - d/dx)/sqrt(2)`.
    pub fn creation() -> Self {
        adjoint(&Self::annihilation())
    }

    pub fn x_coeff(&self) -> Complex64 {
        self.x_coeff
    }

    pub fn d_coeff(&self) -> Complex64 {
        self.d_coeff
    }

    pub fn apply(&self, f: &GaussPoly) -> GaussPoly {
        apply_ladder(self, f)
    }
}

/// `(mu x + nu d/dx) f`, exact up to rounding; the scale and width of `f`
/// are preserved and the degree grows by at most one.
pub fn apply_ladder(op: &LadderOperator, f: &GaussPoly) -> GaussPoly {
    // mu x f + nu (p' - kappa x p) e^{..} = (mu - nu kappa) x f + nu p' e^{..}
    f.combine_ladder(op.x_coeff - op.d_coeff * f.kappa, op.d_coeff * f.scale)
}

/// Formal adjoint: `mu x + nu d/dx -> conj(mu) x - conj(nu) d/dx`.
pub fn adjoint(op: &LadderOperator) -> LadderOperator {
    LadderOperator {
        x_coeff: op.x_coeff.conj(),
        d_coeff: -op.d_coeff.conj(),
    }
}

/// `\int conj(f(x)) g(x) dx` in closed form.
///
/// With `sigma = (conj(kappa_f) + kappa_g)/2` and `s = sqrt(sigma)`, the
/// substitution `t = s x` (a contour rotation, legitimate because
/// `Re sigma > 0`) turns the integral into `(1/s) \int F(t) G(t) e^{-t^2} dt`.
/// Both polynomial parts are re-expanded in `h_m(t)`, where the integral is
/// the plain coefficient dot product.
pub fn inner_product(f: &GaussPoly, g: &GaussPoly) -> Result<Complex64, GaussPolyError> {
    if f.is_zero() || g.is_zero() {
        return Ok(czero());
    }
    let sigma = (f.kappa.conj() + g.kappa) / 2.0;
    if !(sigma.re > 0.0) {
        return Err(GaussPolyError::NonIntegrable {
            re_sum: 2.0 * sigma.re,
        });
    }
    let s = sigma.sqrt();
    let conj_f: Vec<_> = f.coeffs().iter().map(|c| c.conj()).collect();
    let a = expand_rescaled(&conj_f, f.scale.conj() / s);
    let b = expand_rescaled(g.coeffs(), g.scale / s);
    let dot: Complex64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
    Ok(dot / s)
}

/// The scalar `lambda` with `(AB - BA) f = lambda f`.
///
/// For first-order operators the commutator is the constant
/// `nu_A mu_B - mu_A nu_B`; the check recomputes it from the actual
/// compositions and rejects residuals that are not proportional to `f`.
pub fn commutator_check(
    op_a: &LadderOperator,
    op_b: &LadderOperator,
    f: &GaussPoly,
) -> Result<Complex64, GaussPolyError> {
    if f.is_zero() {
        return Err(GaussPolyError::ZeroFunction);
    }
    let ab = op_a.apply(&op_b.apply(f));
    let ba = op_b.apply(&op_a.apply(f));
    let comm = ab.sub(&ba)?;
    // least squares lambda over the coefficient vectors
    let fc = f.coeffs();
    let num: Complex64 = fc
        .iter()
        .enumerate()
        .map(|(k, c)| c.conj() * comm.poly.coeff(k))
        .sum();
    let den: f64 = fc.iter().map(|c| c.norm_sqr()).sum();
    let lambda = num / den;
    let residual = comm.sub(&f.scaled(lambda))?;
    let reference = f.max_abs_coeff().max(comm.max_abs_coeff());
    let rel = residual.max_abs_coeff() / reference;
    if rel > PROPORTIONALITY_TOL {
        return Err(GaussPolyError::NotProportional { residual: rel });
    }
    Ok(lambda)
}
