//! Scenario assembly from a key-value file and command-line flags (flags win).

use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use clap::Args;
use noma_aoi::experiments::ScenarioOverrides;
use noma_aoi::{db_to_linear, SystemConfig};
use serde::Deserialize;

/// Level-selection distribution as given on the command line or in a file.
#[derive(Debug, Clone, PartialEq)]
pub enum LevelProbs {
    Uniform,
    Explicit(Vec<f64>),
}

impl FromStr for LevelProbs {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s.trim().eq_ignore_ascii_case("uniform") {
            return Ok(LevelProbs::Uniform);
        }
        s.split(',')
            .map(|v| {
                v.trim()
                    .parse::<f64>()
                    .map_err(|_| format!("'{v}' is not a number (expected 'uniform' or v1,v2,...)"))
            })
            .collect::<Result<Vec<_>, _>>()
            .map(LevelProbs::Explicit)
    }
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum FileLevelProbs {
    List(Vec<f64>),
    Name(String),
}

/// Contents of a scenario file: TOML key-value pairs, all optional.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    m: Option<usize>,
    k: Option<usize>,
    lambda: Option<f64>,
    p_tx: Option<f64>,
    q: Option<FileLevelProbs>,
    power_db: Option<f64>,
    rate: Option<f64>,
    slot_duration: Option<f64>,
}

fn read_file(path: &Path) -> Result<ScenarioFile> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read scenario file {}", path.display()))?;
    toml::from_str(&text).with_context(|| format!("invalid scenario file {}", path.display()))
}

#[derive(Debug, Clone, Default, Args)]
pub struct ScenarioArgs {
    /// Scenario file with keys m, k, lambda, p_tx, q, power_db, rate, slot_duration.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Number of sources M.
    #[arg(long)]
    pub m: Option<usize>,
    /// Number of received SNR levels K.
    #[arg(long)]
    pub k: Option<usize>,
    /// Per-slot arrival probability.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Attempt probability P_TX.
    #[arg(long)]
    pub ptx: Option<f64>,
    /// Transmit power budget in dB.
    #[arg(long = "power-db", allow_hyphen_values = true)]
    pub power_db: Option<f64>,
    /// Target rate R in bits/s/Hz.
    #[arg(long)]
    pub rate: Option<f64>,
    /// Level-selection probabilities: 'uniform' or v1,v2,...
    #[arg(long)]
    pub q: Option<LevelProbs>,
    /// Slot duration T.
    #[arg(long)]
    pub slot: Option<f64>,
}

impl ScenarioArgs {
    /// File values overlaid by flag values. Explicit `q` without `k` fixes `K` to its length.
    pub fn overrides(&self) -> Result<ScenarioOverrides> {
        let file = match &self.config {
            Some(path) => read_file(path)?,
            None => ScenarioFile::default(),
        };
        let file_q = match file.q {
            None => None,
            Some(FileLevelProbs::List(v)) => Some(LevelProbs::Explicit(v)),
            Some(FileLevelProbs::Name(name)) => match name.parse::<LevelProbs>() {
                Ok(LevelProbs::Uniform) => Some(LevelProbs::Uniform),
                _ => bail!("q must be a list of numbers or \"uniform\" (got \"{name}\")"),
            },
        };
        let q = self.q.clone().or(file_q);
        let mut num_levels = self.k.or(file.k);
        let level_probs = match q {
            Some(LevelProbs::Explicit(v)) => {
                num_levels.get_or_insert(v.len());
                Some(v)
            }
            Some(LevelProbs::Uniform) | None => None,
        };
        Ok(ScenarioOverrides {
            sources: self.m.or(file.m),
            num_levels,
            arrival_prob: self.lambda.or(file.lambda),
            attempt_prob: self.ptx.or(file.p_tx),
            power_db: self.power_db.or(file.power_db),
            rate: self.rate.or(file.rate),
            level_probs,
            slot_duration: self.slot.or(file.slot_duration),
        })
    }

    /// Scenario for the analysis and simulation commands, validated.
    pub fn resolve(&self) -> Result<SystemConfig> {
        let cfg = self.overrides()?.apply(default_scenario());
        cfg.ensure_valid()?;
        Ok(cfg)
    }
}

/// Eight sources, two levels, `lambda = p_tx = 0.5`, 20 dB, `R = 0.2`, uniform levels, `T = 1`.
pub fn default_scenario() -> SystemConfig {
    SystemConfig::uniform(8, 2, 0.5, 0.5, db_to_linear(20.0), 0.2)
}
