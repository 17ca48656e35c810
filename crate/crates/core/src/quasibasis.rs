//! The dense domain `D = {f : e^{x^2 |A|/2} f in L^2}`, partial sums of the
//! weak resolution of the identity, and the basis verdict.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::eigensystem::EigenFamily;
use crate::gausspoly::{inner_product, GaussPoly, GaussPolyError};
use crate::gbt::{GbtParams, NormalizabilityReport, Scenario, ANOMALY_TOL};
use crate::norms::{AsymptoticsReport, NormSeries, Trend};
use crate::oracle::{quad_inner, OracleError, Probe, QuadratureSpec};

/// Default `|S_N - <f, g>|` accepted as converged.
pub const DEFAULT_QUASI_TOL: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuasiError {
    #[error("weight exponent {0} must lie in [0, 1)")]
    Weight(f64),
    #[error("pairing with family member {n} failed: {source}")]
    Pairing { n: usize, source: PairingError },
    #[error("pairing <f, g> failed: {0}")]
    Target(PairingError),
    #[error("N_max = {requested} exceeds the family size {built}")]
    BeyondFamily { requested: usize, built: usize },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PairingError {
    #[error(transparent)]
    Exact(#[from] GaussPolyError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    weight_exponent: f64,
}

impl DomainSpec {
    pub fn new(weight_exponent: f64) -> Result<Self, QuasiError> {
        if !(0.0..1.0).contains(&weight_exponent) {
            return Err(QuasiError::Weight(weight_exponent));
        }
        Ok(Self { weight_exponent })
    }

    /// Weight `|alpha beta - gamma delta|`, snapped to 0 below the anomaly tolerance.
    pub fn for_params(params: &GbtParams) -> Result<Self, QuasiError> {
        let a = params.anomaly().norm();
        Self::new(if a <= ANOMALY_TOL { 0.0 } else { a })
    }

    pub fn weight_exponent(&self) -> f64 {
        self.weight_exponent
    }
}

/// Exact for Gaussian-polynomials: `Re kappa > weight` (strict).
pub fn domain_membership(f: &GaussPoly, spec: &DomainSpec) -> bool {
    f.is_zero() || f.kappa().re > spec.weight_exponent
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ordering {
    /// `sum <f, phi_n> <Psi_n, g>`
    PhiFirst,
    /// `sum <f, Psi_n> <phi_n, g>`
    PsiFirst,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuasiBasisCheck {
    pub ordering: Ordering,
    /// `S_N` for `N = 0..=N_max`.
    pub partial_sums: Vec<Complex64>,
    pub target: Complex64,
    pub tolerance: f64,
    pub converged: bool,
    pub final_error: f64,
}

impl QuasiBasisCheck {
    pub fn errors(&self) -> Vec<f64> {
        self.partial_sums.iter().map(|s| (s - self.target).norm()).collect()
    }
}

fn pair(f: &Probe, g: &Probe, spec: &QuadratureSpec) -> Result<Complex64, PairingError> {
    match (f, g) {
        (Probe::Gauss(a), Probe::Gauss(b)) => Ok(inner_product(a, b)?),
        _ => Ok(quad_inner(f, g, spec)?.value),
    }
}

/// Partial sums of the weak resolution of the identity in the chosen order.
///
/// Pairs of [`GaussPoly`]s are integrated exactly; anything sampled goes
/// through the oracle with `spec`.
pub fn partial_sums(
    family: &EigenFamily,
    f: &Probe,
    g: &Probe,
    n_max: usize,
    ordering: Ordering,
    spec: &QuadratureSpec,
    tolerance: f64,
) -> Result<QuasiBasisCheck, QuasiError> {
    if n_max > family.n_max() {
        return Err(QuasiError::BeyondFamily {
            requested: n_max,
            built: family.n_max(),
        });
    }
    let target = pair(f, g, spec).map_err(QuasiError::Target)?;
    let terms: Vec<Complex64> = (0..=n_max)
        .into_par_iter()
        .map(|n| {
            let (left, right) = match ordering {
                Ordering::PhiFirst => (family.phi(n), family.psi(n)),
                Ordering::PsiFirst => (family.psi(n), family.phi(n)),
            };
            let fa = pair(f, &Probe::Gauss(left.clone()), spec);
            let bg = pair(&Probe::Gauss(right.clone()), g, spec);
            match (fa, bg) {
                (Ok(x), Ok(y)) => Ok(x * y),
                (Err(e), _) | (_, Err(e)) => Err(QuasiError::Pairing { n, source: e }),
            }
        })
        .collect::<Result<_, _>>()?;
    let partial_sums: Vec<Complex64> = terms
        .iter()
        .scan(Complex64::new(0.0, 0.0), |acc, t| {
            *acc += t;
            Some(*acc)
        })
        .collect();
    let final_error = (partial_sums[n_max] - target).norm();
    Ok(QuasiBasisCheck {
        ordering,
        partial_sums,
        target,
        tolerance,
        converged: final_error <= tolerance,
        final_error,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum VerdictKind {
    NotPseudoBosonic,
    RieszLikeCollapse,
    BiorthogonalBasesNotRiesz,
    QuasiBasesOnly,
    UndeterminedClosedForm,
}

impl VerdictKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            VerdictKind::NotPseudoBosonic => "NOT_PSEUDO_BOSONIC",
            VerdictKind::RieszLikeCollapse => "RIESZ_LIKE_COLLAPSE",
            VerdictKind::BiorthogonalBasesNotRiesz => "BIORTHOGONAL_BASES_NOT_RIESZ",
            VerdictKind::QuasiBasesOnly => "QUASI_BASES_ONLY",
            VerdictKind::UndeterminedClosedForm => "UNDETERMINED_CLOSED_FORM",
        }
    }
}

/// Oracle observations used when the closed forms do not apply.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleEvidence {
    /// Inclusive range over which monotonicity was checked.
    pub n_range: (usize, usize),
    pub phi_strictly_increasing: bool,
    pub psi_strictly_increasing: bool,
}

impl OracleEvidence {
    pub fn from_series(series: &NormSeries, lo: usize, hi: usize) -> Self {
        let hi = hi.min(series.len().saturating_sub(1));
        let increasing = |v: &dyn Fn(usize) -> f64| (lo..hi).all(|n| v(n + 1) > v(n));
        Self {
            n_range: (lo, hi),
            phi_strictly_increasing: increasing(&|n| series.ln_phi(n)),
            psi_strictly_increasing: increasing(&|n| series.ln_psi(n)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Evidence {
    pub normalizability: NormalizabilityReport,
    pub asymptotics: Option<AsymptoticsReport>,
    pub oracle: Option<OracleEvidence>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasisVerdict {
    pub kind: VerdictKind,
    pub rationale_codes: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub oracle_evidence: Option<OracleEvidence>,
}

/// Classification from the scenario, the anomaly and the growth bases.
pub fn verdict(params: &GbtParams, evidence: &Evidence) -> BasisVerdict {
    let mut codes: Vec<String> = Vec::new();
    let mut code = |s: &str| codes.push(s.to_string());
    let scenario = evidence.normalizability.scenario;
    let kind = match scenario {
        Scenario::A => {
            code("SCENARIO_A");
            code("PSI0_NOT_SQUARE_INTEGRABLE");
            VerdictKind::NotPseudoBosonic
        }
        Scenario::B => {
            code("SCENARIO_B");
            code("PHI0_NOT_SQUARE_INTEGRABLE");
            VerdictKind::NotPseudoBosonic
        }
        Scenario::C => {
            code("SCENARIO_C");
            code("PHI0_NOT_SQUARE_INTEGRABLE");
            code("PSI0_NOT_SQUARE_INTEGRABLE");
            VerdictKind::NotPseudoBosonic
        }
        Scenario::D => {
            code("SCENARIO_D");
            match &evidence.asymptotics {
                None => {
                    code("CLOSED_FORMS_OUT_OF_REGIME");
                    if params.anomaly().norm() <= ANOMALY_TOL {
                        code("ANOMALY_ZERO");
                    } else {
                        code("ANOMALY_NONZERO");
                    }
                    if let Some(o) = &evidence.oracle {
                        if o.phi_strictly_increasing && o.psi_strictly_increasing {
                            code("ORACLE_BOTH_NORMS_INCREASING");
                        }
                    }
                    VerdictKind::UndeterminedClosedForm
                }
                Some(a) if a.anomaly == 0.0 => {
                    code("ANOMALY_ZERO");
                    if a.phi_trend == Trend::Bounded && a.psi_trend == Trend::Bounded {
                        code("UNIT_GROWTH_BASES");
                        if params.b_is_a_dagger() {
                            code("B_EQUALS_A_DAGGER");
                        }
                        VerdictKind::RieszLikeCollapse
                    } else {
                        code("GROWTH_BASE_NOT_UNIT");
                        code("NORMS_UNBOUNDED_IN_ONE_FAMILY");
                        VerdictKind::BiorthogonalBasesNotRiesz
                    }
                }
                Some(_) => {
                    code("ANOMALY_NONZERO");
                    code("NORM_PRODUCT_DIVERGES");
                    VerdictKind::QuasiBasesOnly
                }
            }
        }
    };
    BasisVerdict {
        kind,
        rationale_codes: codes,
        oracle_evidence: if kind == VerdictKind::UndeterminedClosedForm {
            evidence.oracle.clone()
        } else {
            None
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigensystem::build_family;
    use crate::gbt::{constrained_family, normalizability, presets};
    use crate::norms::asymptotics;
    use crate::specialfns::hermite_basis_function;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn evidence(p: &GbtParams) -> Evidence {
        let conv = crate::eigensystem::NormalizationConvention::default_for(p);
        Evidence {
            normalizability: normalizability(p),
            asymptotics: asymptotics(p, &conv).ok(),
            oracle: None,
        }
    }

    #[test]
    fn membership() {
        let d = DomainSpec::for_params(&presets::scenario_d()).unwrap();
        assert!((d.weight_exponent() - 1.0 / 6.0).abs() < 1e-15);
        assert!(domain_membership(&GaussPoly::gaussian(c(1.0), c(2.0)), &d));
        assert!(!domain_membership(&GaussPoly::gaussian(c(1.0), c(1.0 / 6.0)), &d));
        let zero = DomainSpec::for_params(&constrained_family(2.0, 1.0).unwrap()).unwrap();
        assert_eq!(zero.weight_exponent(), 0.0);
        assert!(domain_membership(&GaussPoly::gaussian(c(1.0), c(0.01)), &zero));
        assert!(DomainSpec::new(1.0).is_err());
    }

    #[test]
    fn bosonic_collapse_at_first_term() {
        let fam = build_family(&GbtParams::standard_bosons(), 3).unwrap();
        let conv = crate::eigensystem::NormalizationConvention::symmetric(&GbtParams::standard_bosons()).unwrap();
        let fam_sym = crate::eigensystem::build_family_with(&GbtParams::standard_bosons(), conv, 3).unwrap();
        let e0 = Probe::Gauss(hermite_basis_function(0));
        for family in [&fam, &fam_sym] {
            let chk = partial_sums(family, &e0, &e0, 3, Ordering::PhiFirst, &QuadratureSpec::default(), 1e-14).unwrap();
            assert!((chk.partial_sums[0] - 1.0).norm() < 1e-14);
            assert!(chk.converged);
        }
    }

    #[test]
    fn case_d_gaussian_pair() {
        let fam = build_family(&presets::scenario_d(), 60).unwrap();
        let f = Probe::Gauss(GaussPoly::gaussian(c(1.0), c(0.5)));
        let g = Probe::Gauss(GaussPoly::from_real_monomial(&[0.0, 0.0, 1.0], 0.8));
        let spec = QuadratureSpec::default();
        let a = partial_sums(&fam, &f, &g, 60, Ordering::PhiFirst, &spec, DEFAULT_QUASI_TOL).unwrap();
        let b = partial_sums(&fam, &f, &g, 60, Ordering::PsiFirst, &spec, DEFAULT_QUASI_TOL).unwrap();
        assert!(a.converged && b.converged, "{} {}", a.final_error, b.final_error);
        assert!((a.partial_sums[60] - b.partial_sums[60]).norm() < 1e-8);
    }

    #[test]
    fn verdicts() {
        let kinds = [
            (presets::scenario_a(), VerdictKind::NotPseudoBosonic),
            (presets::scenario_b(), VerdictKind::NotPseudoBosonic),
            (presets::scenario_c(), VerdictKind::NotPseudoBosonic),
            (presets::scenario_d(), VerdictKind::QuasiBasesOnly),
            (constrained_family(1.2, 1.0).unwrap(), VerdictKind::BiorthogonalBasesNotRiesz),
            (constrained_family(2.0, 1.0).unwrap(), VerdictKind::BiorthogonalBasesNotRiesz),
            (constrained_family(2f64.sqrt(), 1.0).unwrap(), VerdictKind::RieszLikeCollapse),
            (GbtParams::standard_bosons(), VerdictKind::RieszLikeCollapse),
        ];
        for (p, kind) in kinds {
            let v = verdict(&p, &evidence(&p));
            assert_eq!(v.kind, kind, "{p:?}");
            assert!(!v.rationale_codes.is_empty());
        }
        let v = verdict(&GbtParams::standard_bosons(), &evidence(&GbtParams::standard_bosons()));
        assert!(v.rationale_codes.iter().any(|c| c == "B_EQUALS_A_DAGGER"));
    }

    #[test]
    fn complex_parameters_are_undetermined() {
        let p = crate::gbt::swanson(crate::gbt::SwansonParams::new(0.3).unwrap());
        let v = verdict(&p, &evidence(&p));
        assert_eq!(v.kind, VerdictKind::UndeterminedClosedForm);
    }
}
