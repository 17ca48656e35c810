//! Run configuration. JSON on disk; complex numbers are `[re, im]` pairs.

use std::path::PathBuf;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::eigensystem::MAX_FAMILY_N;
use crate::gausspoly::GaussPoly;
use crate::gbt::{constrained_family, presets, swanson, GbtParams, SwansonParams};
use crate::oracle::Probe;

use super::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct ComplexPair(pub f64, pub f64);

impl ComplexPair {
    pub fn to_complex(self) -> Complex64 {
        Complex64::new(self.0, self.1)
    }
}

impl From<Complex64> for ComplexPair {
    fn from(z: Complex64) -> Self {
        ComplexPair(z.re, z.im)
    }
}

impl std::str::FromStr for ComplexPair {
    type Err = String;

    /// `re` or `re,im`.
    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        let num = |p: &str| p.parse::<f64>().map_err(|e| format!("'{p}': {e}"));
        match parts.as_slice() {
            [re] => Ok(ComplexPair(num(re)?, 0.0)),
            [re, im] => Ok(ComplexPair(num(re)?, num(im)?)),
            _ => Err(format!("expected 're' or 're,im', got '{s}'")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Classify,
    Spectrum,
    Verify,
    Quasi,
    Sweep,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Classify => "classify",
            Mode::Spectrum => "spectrum",
            Mode::Verify => "verify",
            Mode::Quasi => "quasi",
            Mode::Sweep => "sweep",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ConventionChoice {
    /// `N_phi = 1`.
    #[default]
    Default,
    /// `N_phi = N_psi`, real ordered parameters only.
    Symmetric,
}

/// Exactly one way of specifying the transformation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamsSource {
    Explicit {
        alpha: ComplexPair,
        beta: ComplexPair,
        gamma: ComplexPair,
        delta: ComplexPair,
    },
    Swanson {
        theta: f64,
    },
    Constrained {
        beta: f64,
        delta: f64,
    },
}

impl ParamsSource {
    pub fn from_params(p: &GbtParams) -> Self {
        ParamsSource::Explicit {
            alpha: p.alpha().into(),
            beta: p.beta().into(),
            gamma: p.gamma().into(),
            delta: p.delta().into(),
        }
    }

    pub fn resolve(&self) -> Result<GbtParams, CliError> {
        let bad = |e: crate::gbt::GbtError| CliError::Usage(format!("params: {e}"));
        match *self {
            ParamsSource::Explicit {
                alpha,
                beta,
                gamma,
                delta,
            } => GbtParams::new(
                alpha.to_complex(),
                beta.to_complex(),
                gamma.to_complex(),
                delta.to_complex(),
            )
            .map_err(bad),
            ParamsSource::Swanson { theta } => Ok(swanson(SwansonParams::new(theta).map_err(bad)?)),
            ParamsSource::Constrained { beta, delta } => constrained_family(beta, delta).map_err(bad),
        }
    }
}

/// Named parameter sets for the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Preset {
    A,
    B,
    C,
    D,
    Bosons,
}

impl Preset {
    pub fn params(&self) -> GbtParams {
        match self {
            Preset::A => presets::scenario_a(),
            Preset::B => presets::scenario_b(),
            Preset::C => presets::scenario_c(),
            Preset::D => presets::scenario_d(),
            Preset::Bosons => GbtParams::standard_bosons(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Coefficient residuals of ladder, eigenvalue and closed-form relations.
    pub residual: f64,
    /// Gram matrix against the identity, real parameters.
    pub gram: f64,
    /// Gram matrix against the identity, complex parameters.
    pub gram_complex: f64,
    /// Closed-form vs oracle norms, relative, `n <= 20`.
    pub oracle_rel: f64,
    /// Closed-form vs oracle norms, log scale, `n <= 60`.
    pub oracle_log: f64,
    /// Relative variation of the norm product when it should be constant.
    pub product_rel: f64,
    /// Fitted growth rate of the norm product.
    pub slope: f64,
    /// `|S_N - <f, g>|` for the quasi-basis identity.
    pub quasi: f64,
    /// Agreement of the two summation orders.
    pub ordering: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            residual: 1e-10,
            gram: 1e-10,
            gram_complex: 1e-9,
            oracle_rel: 1e-8,
            oracle_log: 1e-6,
            product_rel: 1e-10,
            slope: 1e-2,
            quasi: 1e-6,
            ordering: 1e-8,
        }
    }
}

/// A test function for the quasi-basis sums.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestFunction {
    /// `sum_k c_k x^k e^{-kappa x^2/2}`.
    GaussPoly {
        monomial: Vec<ComplexPair>,
        kappa: ComplexPair,
    },
    /// `1/(1 + (x/width)^2)`, integrated by the oracle.
    Lorentzian { width: f64 },
}

impl TestFunction {
    pub fn gauss_poly(&self) -> Option<GaussPoly> {
        match self {
            TestFunction::GaussPoly { monomial, kappa } => {
                let coeffs: Vec<Complex64> = monomial.iter().map(|c| c.to_complex()).collect();
                Some(GaussPoly::from_monomial(&coeffs, kappa.to_complex()))
            }
            TestFunction::Lorentzian { .. } => None,
        }
    }

    pub fn probe(&self) -> Result<Probe, CliError> {
        match self {
            TestFunction::GaussPoly { kappa, .. } => {
                if !(kappa.0 > 0.0) {
                    return Err(CliError::Usage(format!("test function kappa {kappa:?} must have Re > 0")));
                }
                Ok(Probe::Gauss(self.gauss_poly().expect("gauss variant")))
            }
            &TestFunction::Lorentzian { width } => {
                if !(width > 0.0) {
                    return Err(CliError::Usage(format!("lorentzian width {width} must be positive")));
                }
                Ok(Probe::sampled(move |x| {
                    let u = x / width;
                    Complex64::new(1.0 / (1.0 + u * u), 0.0)
                }))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuasiConfig {
    pub f: TestFunction,
    pub g: TestFunction,
    pub n_max: usize,
}

impl Default for QuasiConfig {
    fn default() -> Self {
        Self {
            f: TestFunction::GaussPoly {
                monomial: vec![ComplexPair(1.0, 0.0)],
                kappa: ComplexPair(0.5, 0.0),
            },
            g: TestFunction::GaussPoly {
                monomial: vec![ComplexPair(0.0, 0.0), ComplexPair(0.0, 0.0), ComplexPair(1.0, 0.0)],
                kappa: ComplexPair(0.8, 0.0),
            },
            n_max: 60,
        }
    }
}

/// `steps` evenly spaced values from `start` to `stop` inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridRange {
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
}

impl GridRange {
    pub fn values(&self) -> Vec<f64> {
        match self.steps {
            0 => Vec::new(),
            1 => vec![self.start],
            n => (0..n)
                .map(|i| self.start + (self.stop - self.start) * i as f64 / (n - 1) as f64)
                .collect(),
        }
    }
}

impl std::str::FromStr for GridRange {
    type Err = String;

    /// `start,stop,steps`.
    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(format!("expected 'start,stop,steps', got '{s}'"));
        }
        let num = |p: &str| p.parse::<f64>().map_err(|e| format!("'{p}': {e}"));
        Ok(GridRange {
            start: num(parts[0])?,
            stop: num(parts[1])?,
            steps: parts[2].parse().map_err(|e| format!("'{}': {e}", parts[2]))?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepConfig {
    Constrained { beta: GridRange, delta: GridRange },
    Swanson { theta: GridRange },
    Points { points: Vec<ParamsSource> },
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig::Constrained {
            beta: GridRange {
                start: 1.1,
                stop: 3.0,
                steps: 20,
            },
            delta: GridRange {
                start: 1.0,
                stop: 1.0,
                steps: 1,
            },
        }
    }
}

impl SweepConfig {
    pub fn points(&self) -> Vec<ParamsSource> {
        match self {
            SweepConfig::Constrained { beta, delta } => {
                let deltas = delta.values();
                beta.values()
                    .into_iter()
                    .flat_map(|b| deltas.iter().map(move |&d| ParamsSource::Constrained { beta: b, delta: d }))
                    .collect()
            }
            SweepConfig::Swanson { theta } => theta
                .values()
                .into_iter()
                .map(|theta| ParamsSource::Swanson { theta })
                .collect(),
            SweepConfig::Points { points } => points.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub mode: Mode,
    pub params: Option<ParamsSource>,
    pub n_max: usize,
    pub convention: ConventionChoice,
    pub tolerances: Tolerances,
    pub seed: u64,
    pub quasi: QuasiConfig,
    pub sweep: Option<SweepConfig>,
    pub out: Option<PathBuf>,
    pub format: Format,
}

pub const DEFAULT_SEED: u64 = 20_240_917;
pub const DEFAULT_N_MAX: usize = 50;

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            mode: Mode::Classify,
            params: None,
            n_max: DEFAULT_N_MAX,
            convention: ConventionChoice::Default,
            tolerances: Tolerances::default(),
            seed: DEFAULT_SEED,
            quasi: QuasiConfig::default(),
            sweep: None,
            out: None,
            format: Format::Json,
        }
    }
}

impl RunConfig {
    /// Parses either a config or a previously written report, whose
    /// `config` field is the echo of the run that produced it. The output
    /// path of an echoed config is dropped.
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| CliError::Usage(format!("config is not valid JSON: {e}")))?;
        let is_report = value.get("artifact").is_some() && value.get("config").is_some();
        let inner = if is_report { value["config"].clone() } else { value };
        let mut cfg: RunConfig =
            serde_json::from_value(inner).map_err(|e| CliError::Usage(format!("config: {e}")))?;
        if is_report {
            // a re-run must not overwrite the report it was read from
            cfg.out = None;
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.n_max > MAX_FAMILY_N {
            return Err(CliError::Usage(format!("n_max = {} exceeds {MAX_FAMILY_N}", self.n_max)));
        }
        if self.quasi.n_max > MAX_FAMILY_N {
            return Err(CliError::Usage(format!(
                "quasi.n_max = {} exceeds {MAX_FAMILY_N}",
                self.quasi.n_max
            )));
        }
        if self.mode != Mode::Sweep && self.params.is_none() {
            return Err(CliError::Usage(format!(
                "mode '{}' needs a params source (explicit, swanson or constrained)",
                self.mode.as_str()
            )));
        }
        let tol = &self.tolerances;
        let all = [
            tol.residual,
            tol.gram,
            tol.gram_complex,
            tol.oracle_rel,
            tol.oracle_log,
            tol.product_rel,
            tol.slope,
            tol.quasi,
            tol.ordering,
        ];
        if all.iter().any(|t| !(*t > 0.0)) {
            return Err(CliError::Usage("tolerances must be positive".into()));
        }
        Ok(())
    }
}
