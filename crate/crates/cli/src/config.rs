//! Run configuration: TOML file merged with command-line flags.

use std::path::PathBuf;

use qdiff_core::speed::Direction;
use qdiff_core::sweeps::SweepSpec;
use qdiff_core::FieldSpec;
use serde::{Deserialize, Serialize};

pub const DEFAULT_OUT: &str = "qdiff_out";
pub const WORKERS_ENV: &str = "QDIFF_WORKERS";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Eig,
    Speed,
    Verify,
    Sweep,
    Simulate,
    Optimize,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Eig => "eig",
            Command::Speed => "speed",
            Command::Verify => "verify",
            Command::Sweep => "sweep",
            Command::Simulate => "simulate",
            Command::Optimize => "optimize",
        }
    }

    pub fn default_tolerance(self) -> f64 {
        match self {
            Command::Eig | Command::Verify => 1e-8,
            Command::Speed | Command::Sweep => 1e-7,
            Command::Simulate => 1e-6,
            Command::Optimize => 1e-4,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateOptions {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_final: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dx: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub domain_length: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub level: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cfl_safety: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub transient_fraction: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial_width: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizeOptions {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q_num: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q_den: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_iters: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cool: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cool_every: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub proposal_sigma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bounds: Option<(f64, f64)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial_control: Option<[f64; 4]>,
}

/// Everything a run needs; absent keys take per-command defaults.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub subcommand: Option<Command>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<FieldSpec>,
    #[serde(rename = "D", skip_serializing_if = "Option::is_none")]
    pub d: Option<FieldSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub direction: Option<Direction>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub simulate: Option<SimulateOptions>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub optimize: Option<OptimizeOptions>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
}

/// Problem with the configuration (exit code 2).
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl RunConfig {
    pub fn from_toml(text: &str, origin: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError(format!("{origin}: {e}")))
    }

    pub fn load(path: &std::path::Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text, &path.display().to_string())
    }

    #[cfg(test)]
    pub fn to_toml(&self) -> Result<String, ConfigError> {
        toml::to_string(self).map_err(|e| ConfigError(format!("serializing config: {e}")))
    }

    pub fn require_r(&self) -> Result<&FieldSpec, ConfigError> {
        self.r.as_ref().ok_or_else(|| missing("r", "--r const:1"))
    }

    pub fn require_d(&self) -> Result<&FieldSpec, ConfigError> {
        self.d.as_ref().ok_or_else(|| missing("D", "--D cos2:0.1,1,0"))
    }

    pub fn require_q(&self) -> Result<f64, ConfigError> {
        self.q.ok_or_else(|| missing("q", "--q 0.5"))
    }

    pub fn tolerance_or_default(&self, cmd: Command) -> f64 {
        self.tolerance.unwrap_or(cmd.default_tolerance())
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
    }
}

fn missing(key: &str, example: &str) -> ConfigError {
    ConfigError(format!("missing `{key}`: set it in the config file or pass e.g. `{example}`"))
}

pub fn check_positive(name: &str, v: f64) -> Result<(), ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(ConfigError(format!("`{name}` must be positive and finite, got {v}")))
    }
}

pub fn check_finite(name: &str, v: f64) -> Result<(), ConfigError> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(ConfigError(format!("`{name}` must be finite, got {v}")))
    }
}

/// `--workers`, else the config value, else `QDIFF_WORKERS`.
pub fn resolve_workers(flag: Option<usize>, config: Option<usize>) -> Result<Option<usize>, ConfigError> {
    if flag.is_some() || config.is_some() {
        return Ok(flag.or(config));
    }
    if let Ok(v) = std::env::var(WORKERS_ENV) {
        let n: usize = v
            .trim()
            .parse()
            .map_err(|_| ConfigError(format!("{WORKERS_ENV}={v:?} is not a worker count")))?;
        return Ok(Some(n));
    }
    Ok(None)
}
