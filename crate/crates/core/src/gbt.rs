//! Transformation parameters `(alpha, beta, gamma, delta)` with
//! `a = beta c - delta c^dagger`, `b = -alpha c + gamma c^dagger`.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gausspoly::{adjoint, LadderOperator};

/// Allowed deviation of `beta gamma - alpha delta` from 1.
pub const DET_TOL: f64 = 1e-12;

/// Imaginary parts below this are treated as zero when deciding whether a
/// parameter set is real.
pub const REAL_TOL: f64 = 1e-14;

/// Anomalies `|alpha beta - gamma delta|` at or below this count as zero.
pub const ANOMALY_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GbtError {
    #[error("det(T) = beta gamma - alpha delta = {det} differs from 1")]
    Determinant { det: Complex64 },
    #[error("degenerate ground-state exponent: {which} = 0")]
    DegenerateExponent { which: &'static str },
    #[error("theta = {theta} is outside (-pi/4, pi/4) \\ {{0}}")]
    ThetaRange { theta: f64 },
    #[error("constrained family needs beta > delta > 0 (got beta = {beta}, delta = {delta})")]
    Ordering { beta: f64, delta: f64 },
    #[error("non-finite parameter")]
    NonFinite,
}

/// Validated transformation coefficients (`det T = 1`, nondegenerate exponents).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GbtParams {
    alpha: Complex64,
    beta: Complex64,
    gamma: Complex64,
    delta: Complex64,
}

impl GbtParams {
    pub fn new(
        alpha: Complex64,
        beta: Complex64,
        gamma: Complex64,
        delta: Complex64,
    ) -> Result<Self, GbtError> {
        let all = [alpha, beta, gamma, delta];
        if all.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(GbtError::NonFinite);
        }
        let det = beta * gamma - alpha * delta;
        if (det - 1.0).norm() > DET_TOL {
            return Err(GbtError::Determinant { det });
        }
        if (beta + delta).norm() == 0.0 {
            return Err(GbtError::DegenerateExponent { which: "beta + delta" });
        }
        if (gamma + alpha).norm() == 0.0 {
            return Err(GbtError::DegenerateExponent { which: "gamma + alpha" });
        }
        Ok(Self {
            alpha,
            beta,
            gamma,
            delta,
        })
    }

    pub fn real(alpha: f64, beta: f64, gamma: f64, delta: f64) -> Result<Self, GbtError> {
        let c = |v| Complex64::new(v, 0.0);
        Self::new(c(alpha), c(beta), c(gamma), c(delta))
    }

    /// `alpha = delta = 0`, `beta = gamma = 1`: the identity transformation.
    pub fn standard_bosons() -> Self {
        Self::real(0.0, 1.0, 1.0, 0.0).expect("identity is valid")
    }

    pub fn alpha(&self) -> Complex64 {
        self.alpha
    }
    pub fn beta(&self) -> Complex64 {
        self.beta
    }
    pub fn gamma(&self) -> Complex64 {
        self.gamma
    }
    pub fn delta(&self) -> Complex64 {
        self.delta
    }

    pub fn det(&self) -> Complex64 {
        self.beta * self.gamma - self.alpha * self.delta
    }

    /// `b = a^dagger` exactly when `(gamma, -alpha) = (conj beta, -conj delta)`.
    pub fn b_is_a_dagger(&self) -> bool {
        let scale = self.beta.norm().max(self.delta.norm()).max(1.0);
        (self.gamma - self.beta.conj()).norm() <= DET_TOL * scale
            && (self.alpha - self.delta.conj()).norm() <= DET_TOL * scale
    }

    /// Exponent of the `phi_0` Gaussian, `(beta - delta)/(beta + delta)`.
    pub fn phi_exponent(&self) -> Complex64 {
        (self.beta - self.delta) / (self.beta + self.delta)
    }

    /// Exponent of the `Psi_0` Gaussian, `conj((gamma - alpha)/(gamma + alpha))`.
    pub fn psi_exponent(&self) -> Complex64 {
        ((self.gamma - self.alpha) / (self.gamma + self.alpha)).conj()
    }

    /// `(alpha + gamma)(beta + delta)`.
    pub fn width_product(&self) -> Complex64 {
        (self.alpha + self.gamma) * (self.beta + self.delta)
    }

    /// `alpha beta - gamma delta`, the scalar separating genuine bases from
    /// quasi bases.
    pub fn anomaly(&self) -> Complex64 {
        let a = self.alpha * self.beta - self.gamma * self.delta;
        debug_assert!(self.anomaly_identity_residual() <= 1e-11 * self.magnitude().powi(4));
        a
    }

    /// `|(beta^2 - delta^2)(gamma^2 - alpha^2) - (1 - (alpha beta - gamma delta)^2)|`.
    pub fn anomaly_identity_residual(&self) -> f64 {
        let (a, b, g, d) = (self.alpha, self.beta, self.gamma, self.delta);
        let anomaly = a * b - g * d;
        ((b * b - d * d) * (g * g - a * a) - (1.0 - anomaly * anomaly)).norm()
    }

    fn magnitude(&self) -> f64 {
        [self.alpha, self.beta, self.gamma, self.delta]
            .iter()
            .map(|z| z.norm())
            .fold(1.0, f64::max)
    }

    pub fn is_real(&self) -> bool {
        [self.alpha, self.beta, self.gamma, self.delta]
            .iter()
            .all(|z| z.im.abs() <= REAL_TOL)
    }

    /// Real parameters with `beta > delta >= 0` and `gamma > alpha >= 0`, the
    /// regime where the closed-form norms apply.
    pub fn is_real_ordered(&self) -> bool {
        self.is_real()
            && self.beta.re > self.delta.re
            && self.delta.re >= 0.0
            && self.gamma.re > self.alpha.re
            && self.alpha.re >= 0.0
    }

    /// `a = [(beta - delta) x + (beta + delta) d/dx] / sqrt(2)`.
    pub fn a(&self) -> LadderOperator {
        LadderOperator::new(
            (self.beta - self.delta) * FRAC_1_SQRT_2,
            (self.beta + self.delta) * FRAC_1_SQRT_2,
        )
        .expect("beta + delta != 0")
    }

    /// `b = [(gamma - alpha) x - (gamma + alpha) d/dx] / sqrt(2)`.
    pub fn b(&self) -> LadderOperator {
        LadderOperator::new(
            (self.gamma - self.alpha) * FRAC_1_SQRT_2,
            -(self.gamma + self.alpha) * FRAC_1_SQRT_2,
        )
        .expect("gamma + alpha != 0")
    }

    pub fn a_dagger(&self) -> LadderOperator {
        adjoint(&self.a())
    }

    pub fn b_dagger(&self) -> LadderOperator {
        adjoint(&self.b())
    }
}

/// Free-function form of [`GbtParams::new`].
pub fn validate(
    alpha: Complex64,
    beta: Complex64,
    gamma: Complex64,
    delta: Complex64,
) -> Result<GbtParams, GbtError> {
    GbtParams::new(alpha, beta, gamma, delta)
}

/// Which of the two ground states are square integrable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scenario {
    /// `phi_0` in L2, `Psi_0` not.
    A,
    /// `Psi_0` in L2, `phi_0` not.
    B,
    /// Neither.
    C,
    /// Both.
    D,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormalizabilityReport {
    pub phi0_in_h: bool,
    pub psi0_in_h: bool,
    pub scenario: Scenario,
    pub re_phi_exponent: f64,
    pub re_psi_exponent: f64,
}

/// Strict positivity of `Re((beta-delta)/(beta+delta))` and
/// `Re((gamma-alpha)/(gamma+alpha))`. A zero real part leaves a
/// non-decaying polynomial and counts as not normalizable.
pub fn normalizability(params: &GbtParams) -> NormalizabilityReport {
    let re_phi = params.phi_exponent().re;
    let re_psi = params.psi_exponent().re;
    let phi0_in_h = re_phi > 0.0;
    let psi0_in_h = re_psi > 0.0;
    let scenario = match (phi0_in_h, psi0_in_h) {
        (true, false) => Scenario::A,
        (false, true) => Scenario::B,
        (false, false) => Scenario::C,
        (true, true) => Scenario::D,
    };
    NormalizabilityReport {
        phi0_in_h,
        psi0_in_h,
        scenario,
        re_phi_exponent: re_phi,
        re_psi_exponent: re_psi,
    }
}

/// Angle of the one-parameter complex family, `theta in (-pi/4, pi/4)`, `theta != 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SwansonParams {
    theta: f64,
}

impl SwansonParams {
    pub fn new(theta: f64) -> Result<Self, GbtError> {
        if !(theta.abs() < FRAC_PI_4) || theta == 0.0 {
            return Err(GbtError::ThetaRange { theta });
        }
        Ok(Self { theta })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }
}

/// `beta = gamma = cos(theta)`, `delta = alpha = -i sin(theta)`.
pub fn swanson(theta: SwansonParams) -> GbtParams {
    let (s, c) = theta.theta.sin_cos();
    let cc = Complex64::new(c, 0.0);
    let is = Complex64::new(0.0, -s);
    GbtParams::new(is, cc, cc, is).expect("cos^2 + sin^2 = 1")
}

/// Real family with `alpha beta = gamma delta`: given `beta > delta > 0`,
/// `gamma = beta/(beta^2 - delta^2)` and `alpha = delta/(beta^2 - delta^2)`.
pub fn constrained_family(beta: f64, delta: f64) -> Result<GbtParams, GbtError> {
    if !(beta > delta && delta > 0.0) || !beta.is_finite() {
        return Err(GbtError::Ordering { beta, delta });
    }
    let w = (beta - delta) * (beta + delta);
    GbtParams::real(delta / w, beta, beta / w, delta)
}

/// `alpha beta - gamma delta`.
pub fn anomaly(params: &GbtParams) -> Complex64 {
    params.anomaly()
}

/// The four parameter sets illustrating each normalizability scenario.
pub mod presets {
    use super::GbtParams;

    /// `alpha = gamma = delta = 1`, `beta = 2`.
    pub fn scenario_a() -> GbtParams {
        GbtParams::real(1.0, 2.0, 1.0, 1.0).unwrap()
    }

    /// `alpha = beta = delta = 1`, `gamma = 2`.
    pub fn scenario_b() -> GbtParams {
        GbtParams::real(1.0, 1.0, 2.0, 1.0).unwrap()
    }

    /// `alpha = -3/2`, `beta = 1/4`, `gamma = 1`, `delta = 1/2`.
    pub fn scenario_c() -> GbtParams {
        GbtParams::real(-1.5, 0.25, 1.0, 0.5).unwrap()
    }

    /// `alpha = 2/3`, `beta = 2`, `gamma = 1`, `delta = 3/2`.
    pub fn scenario_d() -> GbtParams {
        GbtParams::real(2.0 / 3.0, 2.0, 1.0, 1.5).unwrap()
    }
}
