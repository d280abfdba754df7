//! Command-line front end.
//!
//! Exit codes: 0 success, 2 bad input, 3 numerical failure, 4 disagreement
//! between a canned scenario and its expected outcome.

mod commands;
mod scenarios;

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use thiserror::Error;

use crate::analysis::{AnalysisError, InitKind};
use crate::criteria::CriteriaError;
use crate::expr::Params;
use crate::integrate::{IntegrateError, IntegratorConfig};
use crate::oscillation::OscillationError;
use crate::system::{preset, CoefficientSystem, PresetId, ProblemFile, SystemError};

pub use scenarios::{run_scenario, Check, ScenarioConfig, ScenarioOutcome, SCENARIOS};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Numeric(String),
    #[error("{0}")]
    Mismatch(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Mismatch(_) => 4,
        }
    }
}

impl From<SystemError> for CliError {
    fn from(e: SystemError) -> Self {
        match e {
            SystemError::Eval(e) => CliError::Numeric(e.to_string()),
            e => CliError::Input(e.to_string()),
        }
    }
}

impl From<IntegrateError> for CliError {
    fn from(e: IntegrateError) -> Self {
        match e {
            IntegrateError::InvalidSpan { .. } | IntegrateError::InvalidConfig(_) | IntegrateError::OutOfSpan { .. } => {
                CliError::Input(e.to_string())
            }
            e => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<CriteriaError> for CliError {
    fn from(e: CriteriaError) -> Self {
        match e {
            CriteriaError::InvalidArgument(_) | CriteriaError::InvalidPartition(_) => CliError::Input(e.to_string()),
            CriteriaError::Integrate(e) => e.into(),
            e => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<OscillationError> for CliError {
    fn from(e: OscillationError) -> Self {
        CliError::Numeric(e.to_string())
    }
}

impl From<AnalysisError> for CliError {
    fn from(e: AnalysisError) -> Self {
        match e {
            AnalysisError::Integrate(e) => e.into(),
            e => CliError::Numeric(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "matosc", version, about = "Oscillation analysis of 2x2 linear matrix systems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate seeded prepared solutions and classify their det Φ zeros.
    Analyze(commands::AnalyzeArgs),
    /// Check oscillation and non-oscillation conditions.
    Criteria(commands::CriteriaArgs),
    /// Integrate the Riccati equation directly and report escape to infinity.
    Riccati(commands::RiccatiArgs),
    /// Run the canned scenarios and compare with their expected outcomes.
    Examples(scenarios::ExamplesArgs),
    /// Repeat one check over a grid of values of a named parameter.
    Sweep(commands::SweepArgs),
}

/// Where the coefficients come from.
#[derive(Debug, Clone, Default, Args)]
pub struct ProblemArgs {
    /// Preset name, same as --preset.
    #[arg(value_name = "PRESET")]
    pub name: Option<String>,
    /// Problem description in JSON.
    #[arg(long, value_name = "FILE")]
    pub problem: Option<PathBuf>,
    #[arg(long, value_name = "NAME")]
    pub preset: Option<String>,
    /// Parameter overrides, e.g. `lambda=2,mu=1`.
    #[arg(long, value_name = "K=V,...")]
    pub params: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// End of the time interval; numbers or constant expressions such as `8*pi`.
    #[arg(long, value_parser = parse_time, allow_hyphen_values = true)]
    pub horizon: Option<f64>,
    #[arg(long, default_value_t = 1e-9)]
    pub rtol: f64,
    #[arg(long, default_value_t = 1e-12)]
    pub atol: f64,
    /// Directory for CSV and JSON output.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Print JSON instead of text.
    #[arg(long)]
    pub json: bool,
}

impl CommonArgs {
    pub fn integrator(&self) -> Result<IntegratorConfig, CliError> {
        let cfg = IntegratorConfig::with_tolerances(self.rtol, self.atol);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn horizon_or(&self, default: f64) -> Result<f64, CliError> {
        let h = self.horizon.unwrap_or(default);
        if !h.is_finite() {
            return Err(CliError::Input(format!("horizon {h} is not finite")));
        }
        Ok(h)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InitArg {
    Symmetric,
    Cone,
}

impl From<InitArg> for InitKind {
    fn from(a: InitArg) -> Self {
        match a {
            InitArg::Symmetric => InitKind::Symmetric,
            InitArg::Cone => InitKind::Cone,
        }
    }
}

/// A resolved problem.
pub struct Loaded {
    pub label: String,
    pub problem: ProblemFile,
    pub system: CoefficientSystem,
}

pub fn parse_params(text: &str) -> Result<Params, CliError> {
    let mut params = Params::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| CliError::Input(format!("parameter `{item}` is not of the form name=value")))?;
        let value = parse_time(v).map_err(|e| CliError::Input(format!("parameter `{k}`: {e}")))?;
        params.insert(k.trim().to_string(), value);
    }
    Ok(params)
}

/// A number or a constant expression such as `3*pi`.
pub fn parse_time(text: &str) -> Result<f64, String> {
    if let Ok(v) = text.trim().parse::<f64>() {
        return Ok(v);
    }
    let e = crate::expr::parse(text).map_err(|e| e.to_string())?;
    if !e.is_time_independent() {
        return Err(format!("`{text}` depends on t"));
    }
    e.eval(0.0).map_err(|e| e.to_string())
}

pub fn parse_list(text: &str, what: &str) -> Result<Vec<f64>, CliError> {
    text.split(',')
        .map(|s| {
            parse_time(s).map_err(|e| CliError::Input(format!("{what}: `{s}`: {e}")))
        })
        .collect()
}

impl ProblemArgs {
    pub fn preset_name(&self) -> Result<Option<&str>, CliError> {
        match (&self.name, &self.preset) {
            (Some(a), Some(b)) if a != b => Err(CliError::Input(format!("two presets given: `{a}` and `{b}`"))),
            (Some(a), _) | (None, Some(a)) => Ok(Some(a)),
            (None, None) => Ok(None),
        }
    }

    pub fn load(&self, extra: &Params) -> Result<Loaded, CliError> {
        let mut params = match &self.params {
            Some(p) => parse_params(p)?,
            None => Params::new(),
        };
        params.extend(extra.iter().map(|(k, v)| (k.clone(), *v)));
        match (self.preset_name()?, &self.problem) {
            (Some(_), Some(_)) => Err(CliError::Input("give either a preset or --problem, not both".into())),
            (None, None) => Err(CliError::Input(format!(
                "no problem given: use --problem FILE or a preset ({})",
                PresetId::NAMES.join(", ")
            ))),
            (Some(name), None) => {
                let id = PresetId::from_name(name, &params)?;
                Ok(Loaded {
                    label: name.to_string(),
                    problem: id.problem(),
                    system: preset(id)?,
                })
            }
            (None, Some(path)) => {
                let mut problem = ProblemFile::load(path)?;
                for (k, v) in &params {
                    problem.set_param(k, *v)?;
                }
                let system = problem.build()?;
                Ok(Loaded {
                    label: path.display().to_string(),
                    problem,
                    system,
                })
            }
        }
    }
}

pub(crate) fn write_file(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Input(format!("cannot create {}: {e}", dir.display())))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))
}

pub(crate) fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialise");
    s.push('\n');
    s
}

/// Prints `value` as JSON or `text`, and writes the JSON to `out/name` if requested.
pub(crate) fn emit<T: Serialize>(common: &CommonArgs, name: &str, value: &T, text: String) -> Result<(), CliError> {
    let json = to_json(value);
    if let Some(dir) = &common.out {
        write_file(dir, name, &json)?;
    }
    if common.json {
        print!("{json}");
    } else {
        print!("{text}");
    }
    Ok(())
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Analyze(a) => commands::analyze(&a),
        Command::Criteria(a) => commands::criteria(&a),
        Command::Riccati(a) => commands::riccati(&a),
        Command::Examples(a) => scenarios::examples(&a),
        Command::Sweep(a) => commands::sweep(&a),
    }
}

/// Parses the process arguments, runs, and returns the exit code.
pub fn main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
