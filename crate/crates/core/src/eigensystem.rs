//! Eigenfamilies `phi_n = b^n phi_0 / sqrt(n!)` and `Psi_n = (a^dagger)^n Psi_0 / sqrt(n!)`.
//!
//! The iterative construction is the reference; the closed forms are checked
//! against it. All members carry the Hermite scale of their ground state, so
//! `phi_n` is (up to rounding) a single basis coefficient.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::gausspoly::{inner_product, GaussPoly, GaussPolyError};
use crate::gbt::{normalizability, GbtParams, Scenario, ANOMALY_TOL};

/// Largest `n_max` accepted by [`build_family`].
pub const MAX_FAMILY_N: usize = 200;

const CONVENTION_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EigenError {
    #[error("not pseudo-bosonic (scenario {scenario:?}): {failing} is not square integrable")]
    NotPseudoBosonic {
        scenario: Scenario,
        failing: &'static str,
    },
    #[error("n_max = {n_max} exceeds the cap {cap}")]
    FamilyTooLarge { n_max: usize, cap: usize },
    #[error("requested n_max = {requested} but the family was built to {built}")]
    BeyondFamily { requested: usize, built: usize },
    #[error("symmetric normalization needs real ordered parameters")]
    SymmetricNeedsReal,
    #[error("normalization constants violate conj(N_phi) N_psi = {expected}: got {got}")]
    Convention { expected: Complex64, got: Complex64 },
    #[error(transparent)]
    Pairing(#[from] GaussPolyError),
}

fn one() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

/// Ground-state normalization constants with `<phi_0, Psi_0> = 1`.
///
/// The product fixed by that condition is
/// `conj(N_phi) N_psi = 1 / sqrt(pi conj((alpha + gamma)(beta + delta)))`,
/// which for real parameters is `1 / sqrt(pi (alpha + gamma)(beta + delta))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormalizationConvention {
    pub n_phi: Complex64,
    pub n_psi: Complex64,
}

impl NormalizationConvention {
    /// `N_phi = 1`.
    pub fn default_for(params: &GbtParams) -> Self {
        Self {
            n_phi: one(),
            n_psi: Self::required_product(params),
        }
    }

    /// `N_phi = N_psi = (pi (alpha + gamma)(beta + delta))^{-1/4}`, real
    /// ordered parameters only.
    pub fn symmetric(params: &GbtParams) -> Result<Self, EigenError> {
        if !params.is_real_ordered() {
            return Err(EigenError::SymmetricNeedsReal);
        }
        let n = (PI * params.width_product().re).powf(-0.25);
        Ok(Self {
            n_phi: Complex64::new(n, 0.0),
            n_psi: Complex64::new(n, 0.0),
        })
    }

    /// Chosen `N_phi`, with `N_psi` fixed by the product condition.
    pub fn with_phi(params: &GbtParams, n_phi: Complex64) -> Self {
        Self {
            n_phi,
            n_psi: Self::required_product(params) / n_phi.conj(),
        }
    }

    pub fn required_product(params: &GbtParams) -> Complex64 {
        one() / (PI * params.width_product().conj()).sqrt()
    }

    pub fn check(&self, params: &GbtParams) -> Result<(), EigenError> {
        let expected = Self::required_product(params);
        let got = self.n_phi.conj() * self.n_psi;
        if (got - expected).norm() > CONVENTION_TOL * expected.norm() {
            return Err(EigenError::Convention { expected, got });
        }
        Ok(())
    }
}

/// Hermite scale, Gaussian width and per-step factor of the `phi` family.
struct FamilyShape {
    scale: Complex64,
    kappa: Complex64,
    step: Complex64,
}

fn phi_shape(params: &GbtParams) -> FamilyShape {
    let root = params.width_product().sqrt();
    FamilyShape {
        scale: one() / root,
        kappa: params.phi_exponent(),
        // ((alpha + gamma)/(beta + delta))^{1/2}, branch tied to sqrt(P) above
        step: root / (params.beta() + params.delta()),
    }
}

fn psi_shape(params: &GbtParams) -> FamilyShape {
    let root = params.width_product().conj().sqrt();
    FamilyShape {
        scale: one() / root,
        kappa: params.psi_exponent(),
        step: root / (params.gamma() + params.alpha()).conj(),
    }
}

fn require_scenario_d(params: &GbtParams) -> Result<(), EigenError> {
    let report = normalizability(params);
    let failing = match report.scenario {
        Scenario::D => return Ok(()),
        Scenario::A => "Psi_0",
        Scenario::B => "phi_0",
        Scenario::C => "phi_0 and Psi_0",
    };
    Err(EigenError::NotPseudoBosonic {
        scenario: report.scenario,
        failing,
    })
}

/// `phi_0 = N_phi exp(-x^2 (beta-delta)/(2(beta+delta)))` and
/// `Psi_0 = N_psi exp(-x^2 conj((gamma-alpha)/(gamma+alpha))/2)`.
pub fn ground_states(
    params: &GbtParams,
    convention: &NormalizationConvention,
) -> Result<(GaussPoly, GaussPoly), EigenError> {
    require_scenario_d(params)?;
    let quarter_pi = PI.powf(0.25);
    let p = phi_shape(params);
    let q = psi_shape(params);
    Ok((
        GaussPoly::with_hermite_coeff(0, convention.n_phi * quarter_pi, p.scale, p.kappa),
        GaussPoly::with_hermite_coeff(0, convention.n_psi * quarter_pi, q.scale, q.kappa),
    ))
}

/// Biorthogonal families up to `n_max`.
#[derive(Debug, Clone)]
pub struct EigenFamily {
    params: GbtParams,
    convention: NormalizationConvention,
    phi: Vec<GaussPoly>,
    psi: Vec<GaussPoly>,
}

impl EigenFamily {
    pub fn params(&self) -> &GbtParams {
        &self.params
    }
    pub fn convention(&self) -> &NormalizationConvention {
        &self.convention
    }
    pub fn n_max(&self) -> usize {
        self.phi.len() - 1
    }
    pub fn phi(&self, n: usize) -> &GaussPoly {
        &self.phi[n]
    }
    pub fn psi(&self, n: usize) -> &GaussPoly {
        &self.psi[n]
    }
    pub fn phis(&self) -> &[GaussPoly] {
        &self.phi
    }
    pub fn psis(&self) -> &[GaussPoly] {
        &self.psi
    }
}

/// Iterative construction with the default normalization convention.
pub fn build_family(params: &GbtParams, n_max: usize) -> Result<EigenFamily, EigenError> {
    build_family_with(params, NormalizationConvention::default_for(params), n_max)
}

pub fn build_family_with(
    params: &GbtParams,
    convention: NormalizationConvention,
    n_max: usize,
) -> Result<EigenFamily, EigenError> {
    if n_max > MAX_FAMILY_N {
        return Err(EigenError::FamilyTooLarge {
            n_max,
            cap: MAX_FAMILY_N,
        });
    }
    convention.check(params)?;
    let (phi0, psi0) = ground_states(params, &convention)?;
    let (b, a_dag) = (params.b(), params.a_dagger());
    let mut phi = Vec::with_capacity(n_max + 1);
    let mut psi = Vec::with_capacity(n_max + 1);
    phi.push(phi0);
    psi.push(psi0);
    for n in 0..n_max {
        let norm = Complex64::new(1.0 / ((n + 1) as f64).sqrt(), 0.0);
        let next_phi = b.apply(&phi[n]).scaled(norm);
        let next_psi = a_dag.apply(&psi[n]).scaled(norm);
        phi.push(next_phi);
        psi.push(next_psi);
    }
    Ok(EigenFamily {
        params: *params,
        convention,
        phi,
        psi,
    })
}

/// `phi_n = N_phi (n! 2^n)^{-1/2} ((alpha+gamma)/(beta+delta))^{n/2}
/// H_n(x / sqrt((alpha+gamma)(beta+delta))) exp(-x^2 (beta-delta)/(2(beta+delta)))`.
pub fn closed_form_phi(
    params: &GbtParams,
    convention: &NormalizationConvention,
    n: usize,
) -> Result<GaussPoly, EigenError> {
    require_scenario_d(params)?;
    let s = phi_shape(params);
    // H_n / sqrt(2^n n!) = pi^{1/4} h_n
    let coeff = convention.n_phi * s.step.powi(n as i32) * PI.powf(0.25);
    Ok(GaussPoly::with_hermite_coeff(n, coeff, s.scale, s.kappa))
}

/// The `phi_n` formula under `delta -> conj(alpha)`, `beta -> conj(gamma)`.
pub fn closed_form_psi(
    params: &GbtParams,
    convention: &NormalizationConvention,
    n: usize,
) -> Result<GaussPoly, EigenError> {
    require_scenario_d(params)?;
    let s = psi_shape(params);
    let coeff = convention.n_psi * s.step.powi(n as i32) * PI.powf(0.25);
    Ok(GaussPoly::with_hermite_coeff(n, coeff, s.scale, s.kappa))
}

/// Coefficient residual of `lhs - rhs`, relative to the largest coefficient
/// among `lhs`, `rhs` and the operand the relation was applied to.
fn relation_residual(lhs: &GaussPoly, rhs: &GaussPoly, operand: &GaussPoly) -> f64 {
    let reference = lhs
        .max_abs_coeff()
        .max(rhs.max_abs_coeff())
        .max(operand.max_abs_coeff());
    if reference == 0.0 {
        return 0.0;
    }
    match lhs.sub(rhs) {
        Ok(d) => d.max_abs_coeff() / reference,
        Err(_) => f64::INFINITY,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LadderReport {
    pub n_checked: usize,
    /// `a phi_n = sqrt(n) phi_{n-1}`, including `a phi_0 = 0`.
    pub lowering_phi: f64,
    /// `b phi_n = sqrt(n+1) phi_{n+1}`.
    pub raising_phi: f64,
    /// `b^dagger Psi_n = sqrt(n) Psi_{n-1}`, including `b^dagger Psi_0 = 0`.
    pub lowering_psi: f64,
    /// `a^dagger Psi_n = sqrt(n+1) Psi_{n+1}`.
    pub raising_psi: f64,
    pub max_residual: f64,
}

pub fn verify_ladder(family: &EigenFamily) -> LadderReport {
    let p = family.params();
    let (a, b, a_dag, b_dag) = (p.a(), p.b(), p.a_dagger(), p.b_dagger());
    let n_max = family.n_max();
    let mut lowering_phi: f64 = 0.0;
    let mut raising_phi: f64 = 0.0;
    let mut lowering_psi: f64 = 0.0;
    let mut raising_psi: f64 = 0.0;
    for n in 0..=n_max {
        let sqrt_n = Complex64::new((n as f64).sqrt(), 0.0);
        let sqrt_n1 = Complex64::new(((n + 1) as f64).sqrt(), 0.0);
        let (phi, psi) = (family.phi(n), family.psi(n));

        let below_phi = if n == 0 {
            GaussPoly::zero(phi.kappa())
        } else {
            family.phi(n - 1).scaled(sqrt_n)
        };
        lowering_phi = lowering_phi.max(relation_residual(&a.apply(phi), &below_phi, phi));

        let below_psi = if n == 0 {
            GaussPoly::zero(psi.kappa())
        } else {
            family.psi(n - 1).scaled(sqrt_n)
        };
        lowering_psi = lowering_psi.max(relation_residual(&b_dag.apply(psi), &below_psi, psi));

        if n < n_max {
            let above = family.phi(n + 1).scaled(sqrt_n1);
            raising_phi = raising_phi.max(relation_residual(&b.apply(phi), &above, phi));
            let above = family.psi(n + 1).scaled(sqrt_n1);
            raising_psi = raising_psi.max(relation_residual(&a_dag.apply(psi), &above, psi));
        }
    }
    LadderReport {
        n_checked: n_max,
        lowering_phi,
        raising_phi,
        lowering_psi,
        raising_psi,
        max_residual: lowering_phi.max(raising_phi).max(lowering_psi).max(raising_psi),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct NumberOperatorReport {
    pub n_checked: usize,
    /// Worst relative residual of `N phi_n = n phi_n`, `N = b a`.
    pub max_residual_phi: f64,
    /// Worst relative residual of `N^dagger Psi_n = n Psi_n`, `N^dagger = a^dagger b^dagger`.
    pub max_residual_psi: f64,
    /// Eigenvalues read back from `N phi_n`, pairwise separated by more than 1/2.
    pub eigenvalues_distinct: bool,
    /// `max |<N f, g> - <f, N g>|` over random unit-norm pairs; only computed
    /// for real ordered parameters with `alpha beta = gamma delta`.
    pub self_adjoint_residual: Option<f64>,
}

/// Number of random pairs used for the symmetry check of `N`.
pub const SYMMETRY_SAMPLES: usize = 5;

pub fn number_operator_check(family: &EigenFamily, seed: u64) -> Result<NumberOperatorReport, EigenError> {
    let p = family.params();
    let (a, b, a_dag, b_dag) = (p.a(), p.b(), p.a_dagger(), p.b_dagger());
    let number = |f: &GaussPoly| b.apply(&a.apply(f));
    let mut max_phi: f64 = 0.0;
    let mut max_psi: f64 = 0.0;
    let mut measured = Vec::with_capacity(family.n_max() + 1);
    for n in 0..=family.n_max() {
        let nn = Complex64::new(n as f64, 0.0);
        let (phi, psi) = (family.phi(n), family.psi(n));
        let n_phi = number(phi);
        max_phi = max_phi.max(relation_residual(&n_phi, &phi.scaled(nn), phi));
        let n_psi = a_dag.apply(&b_dag.apply(psi));
        max_psi = max_psi.max(relation_residual(&n_psi, &psi.scaled(nn), psi));
        // Rayleigh quotient on the coefficient vectors
        let num: Complex64 = phi
            .coeffs()
            .iter()
            .enumerate()
            .map(|(k, c)| c.conj() * n_phi.poly().coeff(k))
            .sum();
        let den: f64 = phi.coeffs().iter().map(|c| c.norm_sqr()).sum();
        measured.push(num.re / den);
    }
    let mut sorted = measured.clone();
    sorted.sort_by(f64::total_cmp);
    let eigenvalues_distinct = sorted.windows(2).all(|w| w[1] - w[0] > 0.5);

    let self_adjoint_residual = if p.is_real_ordered() && p.anomaly().norm() <= ANOMALY_TOL {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst: f64 = 0.0;
        for _ in 0..SYMMETRY_SAMPLES {
            let f = random_test_function(&mut rng)?;
            let g = random_test_function(&mut rng)?;
            let lhs = inner_product(&number(&f), &g)?;
            let rhs = inner_product(&f, &number(&g))?;
            worst = worst.max((lhs - rhs).norm());
        }
        Some(worst)
    } else {
        None
    };
    Ok(NumberOperatorReport {
        n_checked: family.n_max(),
        max_residual_phi: max_phi,
        max_residual_psi: max_psi,
        eigenvalues_distinct,
        self_adjoint_residual,
    })
}

/// Unit-norm polynomial times real Gaussian, degree at most 4.
pub fn random_test_function<R: Rng>(rng: &mut R) -> Result<GaussPoly, GaussPolyError> {
    let degree = rng.gen_range(0..=4);
    let kappa = rng.gen_range(0.5..2.0);
    let coeffs: Vec<Complex64> = (0..=degree)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let f = GaussPoly::from_monomial(&coeffs, Complex64::new(kappa, 0.0));
    let norm = inner_product(&f, &f)?.re.sqrt();
    Ok(f.scaled(Complex64::new(1.0 / norm, 0.0)))
}

/// Square matrix `G[n][m] = <phi_n, Psi_m>`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GramMatrix {
    dim: usize,
    entries: Vec<Complex64>,
}

impl GramMatrix {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, n: usize, m: usize) -> Complex64 {
        self.entries[n * self.dim + m]
    }

    /// Largest `|G[n][m] - delta_{nm}|`.
    pub fn identity_deviation(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for n in 0..self.dim {
            for m in 0..self.dim {
                let expect = if n == m { 1.0 } else { 0.0 };
                worst = worst.max((self.get(n, m) - expect).norm());
            }
        }
        worst
    }
}

pub fn biorthonormality_matrix(family: &EigenFamily, n_max: usize) -> Result<GramMatrix, EigenError> {
    if n_max > family.n_max() {
        return Err(EigenError::BeyondFamily {
            requested: n_max,
            built: family.n_max(),
        });
    }
    let dim = n_max + 1;
    let mut entries = Vec::with_capacity(dim * dim);
    for n in 0..dim {
        for m in 0..dim {
            entries.push(inner_product(family.phi(n), family.psi(m))?);
        }
    }
    Ok(GramMatrix { dim, entries })
}
