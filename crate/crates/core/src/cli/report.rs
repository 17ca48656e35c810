//! Report layout. Field order is the serialization order and is stable.

use serde::Serialize;

use crate::gbt::{NormalizabilityReport, Scenario};
use crate::norms::{AsymptoticsReport, CalibrationRecord, NormSeries};
use crate::quasibasis::{BasisVerdict, QuasiBasisCheck};

use super::config::{ComplexPair, RunConfig};

pub const ARTIFACT_NAME: &str = env!("CARGO_PKG_NAME");
pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");
/// Bumped whenever a CSV column list changes.
pub const CSV_SCHEMA_VERSION: u32 = 1;

/// Where a number came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    /// Arithmetic on the input parameters.
    Input,
    /// Closed-form expressions.
    ClosedForm,
    /// Quadrature.
    Oracle,
    /// Exact operations on Gaussian-polynomial coefficients.
    ExactAlgebra,
}

#[derive(Debug, Clone, Serialize)]
pub struct Tagged<T> {
    pub value: T,
    pub source: Source,
}

impl<T> Tagged<T> {
    pub fn new(value: T, source: Source) -> Self {
        Self { value, source }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Artifact {
    pub name: &'static str,
    pub version: &'static str,
    pub csv_schema: u32,
}

impl Default for Artifact {
    fn default() -> Self {
        Self {
            name: ARTIFACT_NAME,
            version: ARTIFACT_VERSION,
            csv_schema: CSV_SCHEMA_VERSION,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ParamsEcho {
    pub alpha: ComplexPair,
    pub beta: ComplexPair,
    pub gamma: ComplexPair,
    pub delta: ComplexPair,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConventionEcho {
    pub name: &'static str,
    pub n_phi: ComplexPair,
    pub n_psi: ComplexPair,
}

#[derive(Debug, Clone, Serialize)]
pub struct CalibrationEcho {
    pub phi: CalibrationRecord,
    pub psi: CalibrationRecord,
    pub source: Source,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub tolerance: f64,
    pub source: Source,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl CheckResult {
    /// Passes when `value <= tolerance`.
    pub fn at_most(name: &str, value: f64, tolerance: f64, source: Source) -> Self {
        Self {
            name: name.to_string(),
            passed: value <= tolerance,
            value,
            tolerance,
            source,
            detail: None,
        }
    }

    pub fn flag(name: &str, passed: bool, source: Source) -> Self {
        Self {
            name: name.to_string(),
            passed,
            value: if passed { 1.0 } else { 0.0 },
            tolerance: 1.0,
            source,
            detail: None,
        }
    }

    pub fn failed(name: &str, detail: String, source: Source) -> Self {
        Self {
            name: name.to_string(),
            passed: false,
            value: f64::NAN,
            tolerance: f64::NAN,
            source,
            detail: Some(detail),
        }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = Some(detail.into());
        self
    }
}

/// One row of the spectrum CSV.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesRow {
    pub n: usize,
    pub log_norm_phi_sq: f64,
    pub log_norm_psi_sq: f64,
    pub log_product: f64,
    pub source: &'static str,
}

pub fn series_rows(series: &NormSeries) -> Vec<SeriesRow> {
    (0..series.len())
        .map(|n| SeriesRow {
            n,
            log_norm_phi_sq: series.ln_phi(n),
            log_norm_psi_sq: series.ln_psi(n),
            log_product: series.ln_product(n),
            source: series.source().as_str(),
        })
        .collect()
}

/// One row of the quasi-basis CSV.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuasiRow {
    pub n: usize,
    pub re_s_phi_first: f64,
    pub im_s_phi_first: f64,
    pub re_s_psi_first: f64,
    pub im_s_psi_first: f64,
    pub err_phi_first: f64,
    pub err_psi_first: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct QuasiEcho {
    pub f_in_domain: Option<bool>,
    pub g_in_domain: Option<bool>,
    pub weight_exponent: f64,
    /// False when a test function lies outside the domain, in which case the
    /// sums are reported without a convergence claim.
    pub convergence_claimed: bool,
    pub phi_first: QuasiBasisCheck,
    pub psi_first: QuasiBasisCheck,
    pub source: Source,
}

pub fn quasi_rows(q: &QuasiEcho) -> Vec<QuasiRow> {
    let (a, b) = (&q.phi_first, &q.psi_first);
    (0..a.partial_sums.len())
        .map(|n| QuasiRow {
            n,
            re_s_phi_first: a.partial_sums[n].re,
            im_s_phi_first: a.partial_sums[n].im,
            re_s_psi_first: b.partial_sums[n].re,
            im_s_psi_first: b.partial_sums[n].im,
            err_phi_first: (a.partial_sums[n] - a.target).norm(),
            err_psi_first: (b.partial_sums[n] - b.target).norm(),
        })
        .collect()
}

/// One row of the sweep table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub index: usize,
    pub alpha_re: f64,
    pub alpha_im: f64,
    pub beta_re: f64,
    pub beta_im: f64,
    pub gamma_re: f64,
    pub gamma_im: f64,
    pub delta_re: f64,
    pub delta_im: f64,
    pub scenario: Option<Scenario>,
    pub anomaly_abs: Option<f64>,
    pub x: Option<f64>,
    pub y: Option<f64>,
    pub product_base: Option<f64>,
    pub verdict: Option<&'static str>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub artifact: Artifact,
    pub config: RunConfig,
    pub params: Option<ParamsEcho>,
    pub scenario: Option<Scenario>,
    pub normalizability: Option<NormalizabilityReport>,
    pub anomaly: Option<Tagged<ComplexPair>>,
    pub convention: Option<ConventionEcho>,
    pub asymptotics: Option<Tagged<AsymptoticsReport>>,
    pub verdict: Option<BasisVerdict>,
    pub calibration: Option<CalibrationEcho>,
    pub series: Vec<SeriesRow>,
    pub quasi: Option<QuasiEcho>,
    pub sweep: Vec<SweepRow>,
    pub checks: Vec<CheckResult>,
    /// Numerical failures that prevented a quantity from being computed.
    pub errors: Vec<String>,
    pub all_passed: bool,
}

impl Report {
    pub fn new(config: RunConfig) -> Self {
        Self {
            artifact: Artifact::default(),
            config,
            params: None,
            scenario: None,
            normalizability: None,
            anomaly: None,
            convention: None,
            asymptotics: None,
            verdict: None,
            calibration: None,
            series: Vec::new(),
            quasi: None,
            sweep: Vec::new(),
            checks: Vec::new(),
            errors: Vec::new(),
            all_passed: true,
        }
    }

    pub fn finish(&mut self) {
        self.all_passed = self.errors.is_empty() && self.checks.iter().all(|c| c.passed);
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
