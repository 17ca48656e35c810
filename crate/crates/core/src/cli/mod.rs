//! Command-line front end.
//!
//! Exit codes: 0 when every requested check passes, 1 for I/O failures,
//! 2 for usage errors, 3 when a check fails and 4 when a quantity could not
//! be computed.

pub mod config;
pub mod jobs;
pub mod report;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use config::{ComplexPair, ConventionChoice, Format, GridRange, Mode, ParamsSource, Preset, RunConfig, SweepConfig};
use report::{quasi_rows, Report};

/// Default output directory when `--out` is not given.
pub const OUT_DIR_ENV: &str = "PSEUDOBOSON_OUT_DIR";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("io: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Io(_) => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "pseudoboson", version, about = "Eigenfamilies, norms and basis verdicts for generalized Bogoliubov transformations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Scenario, anomaly, growth rates and basis verdict.
    Classify(CommonArgs),
    /// Norm series from the closed forms and from quadrature.
    Spectrum(CommonArgs),
    /// Ladder, eigenvalue, biorthonormality, norm and quasi-basis checks.
    Verify(CommonArgs),
    /// Partial sums of the weak resolution of the identity.
    Quasi(CommonArgs),
    /// Classification over a parameter grid.
    Sweep(SweepArgs),
}

#[derive(Debug, Args, Default)]
pub struct CommonArgs {
    /// JSON config, or a report from an earlier run.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// `re` or `re,im`.
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<ComplexPair>,
    #[arg(long, allow_hyphen_values = true)]
    pub beta: Option<ComplexPair>,
    #[arg(long, allow_hyphen_values = true)]
    pub gamma: Option<ComplexPair>,
    #[arg(long, allow_hyphen_values = true)]
    pub delta: Option<ComplexPair>,
    /// Angle of the complex one-parameter family.
    #[arg(long, allow_hyphen_values = true)]
    pub theta: Option<f64>,
    /// `beta,delta` of the real family with `alpha beta = gamma delta`.
    #[arg(long, value_parser = parse_pair)]
    pub constrained: Option<(f64, f64)>,
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    #[arg(long)]
    pub n_max: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long, value_enum)]
    pub convention: Option<ConventionChoice>,
}

#[derive(Debug, Args, Default)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// `start,stop,steps` for beta of the constrained family.
    #[arg(long)]
    pub beta_range: Option<GridRange>,
    /// `start,stop,steps` for delta of the constrained family.
    #[arg(long)]
    pub delta_range: Option<GridRange>,
    /// `start,stop,steps` for the angle of the complex family.
    #[arg(long, allow_hyphen_values = true)]
    pub theta_range: Option<GridRange>,
}

fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    let p: ComplexPair = s.parse()?;
    if !s.contains(',') {
        return Err(format!("expected 'beta,delta', got '{s}'"));
    }
    Ok((p.0, p.1))
}

fn read_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    RunConfig::from_json(&text)
}

/// Config file first, flags on top, mode from the subcommand.
pub fn resolve_config(mode: Mode, args: &CommonArgs) -> Result<RunConfig, CliError> {
    let mut cfg = match &args.config {
        Some(path) => read_config(path)?,
        None => RunConfig::default(),
    };
    cfg.mode = mode;
    let explicit = [args.alpha, args.beta, args.gamma, args.delta];
    let given = explicit.iter().filter(|c| c.is_some()).count();
    let mut sources = Vec::new();
    match given {
        0 => {}
        4 => sources.push(ParamsSource::Explicit {
            alpha: args.alpha.expect("counted"),
            beta: args.beta.expect("counted"),
            gamma: args.gamma.expect("counted"),
            delta: args.delta.expect("counted"),
        }),
        _ => {
            return Err(CliError::Usage(
                "--alpha, --beta, --gamma and --delta must be given together".into(),
            ))
        }
    }
    if let Some(theta) = args.theta {
        sources.push(ParamsSource::Swanson { theta });
    }
    if let Some((beta, delta)) = args.constrained {
        sources.push(ParamsSource::Constrained { beta, delta });
    }
    if let Some(p) = args.preset {
        sources.push(ParamsSource::from_params(&p.params()));
    }
    match sources.len() {
        0 => {}
        1 => cfg.params = Some(sources[0]),
        _ => {
            return Err(CliError::Usage(
                "give exactly one of explicit parameters, --theta, --constrained or --preset".into(),
            ))
        }
    }
    if let Some(n) = args.n_max {
        cfg.n_max = n;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(o) = &args.out {
        cfg.out = Some(o.clone());
    }
    if let Some(f) = args.format {
        cfg.format = f;
    }
    if let Some(c) = args.convention {
        cfg.convention = c;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn resolve_sweep(args: &SweepArgs) -> Result<RunConfig, CliError> {
    let mut cfg = resolve_config(Mode::Sweep, &args.common)?;
    match (args.beta_range, args.delta_range, args.theta_range) {
        (None, None, None) => {}
        (b, d, None) => {
            let (default_beta, default_delta) = match SweepConfig::default() {
                SweepConfig::Constrained { beta, delta } => (beta, delta),
                _ => unreachable!("default grid is constrained"),
            };
            cfg.sweep = Some(SweepConfig::Constrained {
                beta: b.unwrap_or(default_beta),
                delta: d.unwrap_or(default_delta),
            });
        }
        (None, None, Some(theta)) => cfg.sweep = Some(SweepConfig::Swanson { theta }),
        _ => {
            return Err(CliError::Usage(
                "--theta-range cannot be combined with --beta-range or --delta-range".into(),
            ))
        }
    }
    Ok(cfg)
}

/// Renders the report in the configured format.
pub fn render(report: &Report) -> Result<String, CliError> {
    match report.config.format {
        Format::Json => Ok(report.to_json() + "\n"),
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let io = |e: csv::Error| CliError::Io(e.to_string());
            match report.config.mode {
                Mode::Spectrum => report.series.iter().try_for_each(|r| w.serialize(r)).map_err(io)?,
                Mode::Quasi => {
                    if let Some(q) = &report.quasi {
                        quasi_rows(q).iter().try_for_each(|r| w.serialize(r)).map_err(io)?;
                    }
                }
                Mode::Sweep => report.sweep.iter().try_for_each(|r| w.serialize(r)).map_err(io)?,
                Mode::Classify | Mode::Verify => {
                    w.write_record(["name", "passed", "value", "tolerance", "source"]).map_err(io)?;
                    let mut rows: Vec<[String; 5]> = Vec::new();
                    if let Some(v) = &report.verdict {
                        rows.push([
                            "verdict".into(),
                            String::new(),
                            v.kind.as_str().into(),
                            String::new(),
                            if v.oracle_evidence.is_some() { "oracle" } else { "closed_form" }.into(),
                        ]);
                    }
                    for c in &report.checks {
                        let source = serde_json::to_value(c.source).expect("enum serializes");
                        rows.push([
                            c.name.clone(),
                            c.passed.to_string(),
                            format!("{:e}", c.value),
                            format!("{:e}", c.tolerance),
                            source.as_str().unwrap_or_default().to_string(),
                        ]);
                    }
                    rows.iter().try_for_each(|r| w.write_record(r)).map_err(io)?;
                }
            }
            let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
            String::from_utf8(bytes).map_err(|e| CliError::Io(e.to_string()))
        }
    }
}

/// Target file: `--out`, else `$PSEUDOBOSON_OUT_DIR/<mode>.<ext>`, else stdout.
pub fn output_path(report: &Report) -> Option<PathBuf> {
    if let Some(p) = &report.config.out {
        return Some(p.clone());
    }
    let dir = std::env::var_os(OUT_DIR_ENV)?;
    let ext = match report.config.format {
        Format::Json => "json",
        Format::Csv => "csv",
    };
    Some(PathBuf::from(dir).join(format!("{}.{ext}", report.config.mode.as_str())))
}

pub fn exit_code(report: &Report) -> u8 {
    if !report.errors.is_empty() {
        4
    } else if report.checks.iter().any(|c| !c.passed) {
        3
    } else {
        0
    }
}

fn execute(cli: &Cli) -> Result<u8, CliError> {
    let config = match &cli.command {
        Command::Classify(a) => resolve_config(Mode::Classify, a)?,
        Command::Spectrum(a) => resolve_config(Mode::Spectrum, a)?,
        Command::Verify(a) => resolve_config(Mode::Verify, a)?,
        Command::Quasi(a) => resolve_config(Mode::Quasi, a)?,
        Command::Sweep(a) => resolve_sweep(a)?,
    };
    let report = jobs::run(&config)?;
    let text = render(&report)?;
    match output_path(&report) {
        Some(path) => {
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                fs::create_dir_all(parent).map_err(|e| CliError::Io(format!("{}: {e}", parent.display())))?;
            }
            fs::write(&path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        }
        None => {
            std::io::stdout()
                .write_all(text.as_bytes())
                .map_err(|e| CliError::Io(e.to_string()))?;
        }
    }
    for e in &report.errors {
        eprintln!("error: {e}");
    }
    for c in report.checks.iter().filter(|c| !c.passed) {
        eprintln!("check failed: {} (value {}, tolerance {})", c.name, c.value, c.tolerance);
    }
    Ok(exit_code(&report))
}

pub fn main_with<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match execute(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}
