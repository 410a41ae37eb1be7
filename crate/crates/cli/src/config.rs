//! Run configuration: JSON file values overridden by command-line flags.

use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use qspeed_core::models::{Bath, ModelKind, ModelSpec};
use qspeed_core::MetricKind;
use serde::Deserialize;

use crate::error::CliError;
use crate::table::Format;

pub const DEFAULT_TMIN: f64 = 1e-4;
pub const DEFAULT_TMAX: f64 = 30.0;
pub const DEFAULT_POINTS: usize = 400;
pub const DEFAULT_N_MAX: usize = 3;

/// Settings shared by every subcommand. JSON config keys match the flag names.
#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct Settings {
    /// Model key: closed-1q, closed-2q-aligned, closed-2q-anti, open-1q, open-2q-aligned, open-2q-anti
    #[arg(long)]
    pub model: Option<String>,
    /// Metric key: sld or wy
    #[arg(long)]
    pub metric: Option<String>,
    /// Excited-state amplitude in [0, 1]
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Closed-system level splitting
    #[arg(long)]
    pub omega: Option<f64>,
    /// Spectral width ratio Gamma/gamma0
    #[arg(long)]
    pub gamma_ratio: Option<f64>,
    /// Use the Markovian limit Gamma -> infinity
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub markovian_limit: Option<bool>,
    /// Start of the time grid (gamma0 t)
    #[arg(long)]
    pub tmin: Option<f64>,
    /// End of the time grid (gamma0 t)
    #[arg(long)]
    pub tmax: Option<f64>,
    /// Number of grid points
    #[arg(long)]
    pub points: Option<usize>,
    /// Fixed time for parameter sweeps
    #[arg(long)]
    pub time: Option<f64>,
    /// Sweep as <param>:<min>:<max>:<points>
    #[arg(long)]
    pub sweep: Option<String>,
    /// Number of memory/speedup intervals to report
    #[arg(long)]
    pub n_max: Option<usize>,
    /// Output format: csv or json
    #[arg(long)]
    pub format: Option<String>,
    /// Output file (stdout when absent)
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON config file with the same keys as the flags
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

impl Settings {
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::usage(format!("invalid config file {}: {e}", path.display())))
    }

    /// Values from `self`, falling back to `base`.
    pub fn over(self, base: Settings) -> Settings {
        Settings {
            model: self.model.or(base.model),
            metric: self.metric.or(base.metric),
            alpha: self.alpha.or(base.alpha),
            omega: self.omega.or(base.omega),
            gamma_ratio: self.gamma_ratio.or(base.gamma_ratio),
            markovian_limit: self.markovian_limit.or(base.markovian_limit),
            tmin: self.tmin.or(base.tmin),
            tmax: self.tmax.or(base.tmax),
            points: self.points.or(base.points),
            time: self.time.or(base.time),
            sweep: self.sweep.or(base.sweep),
            n_max: self.n_max.or(base.n_max),
            format: self.format.or(base.format),
            out: self.out.or(base.out),
            config: self.config,
        }
    }

    /// Loads the config file named by `--config`, if any, and applies the flags on top.
    pub fn resolve(self) -> Result<Settings, CliError> {
        match &self.config {
            Some(path) => {
                let file = Settings::from_file(path)?;
                Ok(self.over(file))
            }
            None => Ok(self),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub tmin: f64,
    pub tmax: f64,
    pub points: usize,
}

impl TimeGrid {
    pub fn new(tmin: f64, tmax: f64, points: usize) -> Result<Self, CliError> {
        if points < 2 {
            return Err(CliError::usage(format!("grid needs at least 2 points (got {points})")));
        }
        if !(tmin < tmax) || !tmin.is_finite() || !tmax.is_finite() {
            return Err(CliError::usage(format!("grid needs min < max (got {tmin}, {tmax})")));
        }
        Ok(Self { tmin, tmax, points })
    }

    pub fn values(&self) -> Vec<f64> {
        linspace(self.tmin, self.tmax, self.points)
    }
}

pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    let mut out: Vec<f64> = (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect();
    if let Some(last) = out.last_mut() {
        *last = b;
    }
    out
}

/// Parameters that can be swept by `detect`.
pub const SWEEP_PARAMS: &[&str] = &["t", "alpha", "C", "Omega", "Gamma_over_gamma0"];

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub param: String,
    pub grid: TimeGrid,
}

impl SweepSpec {
    pub fn parse(s: &str) -> Result<Self, CliError> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 4 {
            return Err(CliError::usage(format!("sweep must be <param>:<min>:<max>:<points> (got '{s}')")));
        }
        let param = parts[0].to_string();
        if !SWEEP_PARAMS.contains(&param.as_str()) {
            return Err(CliError::usage(format!(
                "unknown sweep parameter '{param}'; valid: {}",
                SWEEP_PARAMS.join(", ")
            )));
        }
        let num = |x: &str| x.parse::<f64>().map_err(|_| CliError::usage(format!("bad number '{x}' in sweep")));
        let points = parts[3]
            .parse::<usize>()
            .map_err(|_| CliError::usage(format!("bad point count '{}' in sweep", parts[3])))?;
        Ok(Self { param, grid: TimeGrid::new(num(parts[1])?, num(parts[2])?, points)? })
    }
}

/// A validated run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub model: ModelKind,
    pub metric: MetricKind,
    pub alpha: Option<f64>,
    pub omega: Option<f64>,
    pub gamma_ratio: Option<f64>,
    pub markovian_limit: bool,
    pub grid: TimeGrid,
    pub time: f64,
    pub sweep: Option<SweepSpec>,
    pub n_max: usize,
    pub format: Format,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_settings(s: &Settings) -> Result<Self, CliError> {
        let model: ModelKind =
            s.model.as_deref().unwrap_or("open-1q").parse().map_err(|e: qspeed_core::ModelError| CliError::usage(e.to_string()))?;
        let metric: MetricKind = s
            .metric
            .as_deref()
            .unwrap_or("sld")
            .parse()
            .map_err(|e: qspeed_core::MetricError| CliError::usage(e.to_string()))?;
        let markovian_limit = s.markovian_limit.unwrap_or(false);
        if markovian_limit && s.gamma_ratio.is_some() {
            return Err(CliError::usage("--gamma-ratio and --markovian-limit are mutually exclusive"));
        }
        if !model.is_open() && (markovian_limit || s.gamma_ratio.is_some()) {
            return Err(CliError::usage(format!("{model} is a closed model; bath settings do not apply")));
        }
        let grid = TimeGrid::new(
            s.tmin.unwrap_or(DEFAULT_TMIN),
            s.tmax.unwrap_or(DEFAULT_TMAX),
            s.points.unwrap_or(DEFAULT_POINTS),
        )?;
        if grid.tmin < 0.0 {
            return Err(CliError::usage(format!("tmin must be non-negative (got {})", grid.tmin)));
        }
        let time = s.time.unwrap_or(1.0);
        if !(time >= 0.0) {
            return Err(CliError::usage(format!("time must be non-negative (got {time})")));
        }
        let sweep = s.sweep.as_deref().map(SweepSpec::parse).transpose()?;
        let format = s.format.as_deref().map_or(Ok(Format::Csv), str::parse)?;
        let cfg = Self {
            model,
            metric,
            alpha: s.alpha,
            omega: s.omega,
            gamma_ratio: s.gamma_ratio,
            markovian_limit,
            grid,
            time,
            sweep,
            n_max: s.n_max.unwrap_or(DEFAULT_N_MAX),
            format,
            out: s.out.clone(),
        };
        cfg.model_spec()?;
        Ok(cfg)
    }

    pub fn model_spec(&self) -> Result<ModelSpec, CliError> {
        let mut spec = ModelSpec::new(self.model);
        if let Some(a) = self.alpha {
            spec.set_param("alpha", a)?;
        }
        if let Some(w) = self.omega {
            spec.set_param("omega", w)?;
        }
        if let Some(r) = self.gamma_ratio {
            spec.set_param("Gamma_over_gamma0", r)?;
        }
        if self.markovian_limit {
            spec.bath = Bath::MarkovianLimit;
        }
        Ok(spec)
    }

    /// Header entries describing the model and metric.
    pub fn describe(&self) -> Vec<(String, String)> {
        let spec = self.model_spec().expect("validated");
        let mut out = vec![
            ("model".to_string(), self.model.to_string()),
            ("metric".to_string(), self.metric.to_string()),
            ("alpha".to_string(), crate::table::fmt_num(spec.alpha)),
        ];
        if self.model.is_open() {
            out.push(("gamma0".to_string(), crate::table::fmt_num(spec.gamma0)));
            let bath = match spec.bath {
                Bath::MarkovianLimit => "markovian-limit".to_string(),
                Bath::Lorentzian { gamma } => {
                    format!("lorentzian, Gamma/gamma0 = {}", crate::table::fmt_num(gamma / spec.gamma0))
                }
            };
            out.push(("bath".to_string(), bath));
        } else {
            out.push(("omega".to_string(), crate::table::fmt_num(spec.omega)));
        }
        out
    }
}
