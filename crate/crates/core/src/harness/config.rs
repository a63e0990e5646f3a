use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::baselines::{BaselineConfig, Strategy};
use super::HarnessError;
use crate::env::EnvConfig;
use crate::rl::train::TrainConfig;
use crate::variant::NetworkVariant;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Train,
    Eval,
    Replay,
    Baseline,
}

/// One experiment, loadable from JSON. Missing fields take their defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub variant: NetworkVariant,
    /// Base seed for training and for deriving evaluation run seeds.
    pub seed: u64,
    /// Explicit evaluation run seeds; derived from `seed` when empty.
    pub seeds: Vec<u64>,
    pub runs: usize,
    pub duration_s: f64,
    pub env: EnvConfig,
    pub train: TrainConfig,
    pub baseline: BaselineConfig,
    pub strategy: Strategy,
    pub out_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            mode: Mode::Train,
            variant: NetworkVariant::Single1,
            seed: 0,
            seeds: Vec::new(),
            runs: 20,
            duration_s: 120.0,
            env: EnvConfig::default(),
            train: TrainConfig::default(),
            baseline: BaselineConfig::default(),
            strategy: Strategy::Orbit,
            out_dir: PathBuf::from("out"),
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)?;
        let cfg: Self = serde_json::from_str(&text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.runs == 0 {
            return Err(HarnessError::Config("runs must be at least 1".into()));
        }
        if !(self.duration_s > 0.0) {
            return Err(HarnessError::Config("duration_s must be positive".into()));
        }
        if !self.seeds.is_empty() && self.seeds.len() < self.runs {
            return Err(HarnessError::Config(format!(
                "{} seeds given for {} runs",
                self.seeds.len(),
                self.runs
            )));
        }
        self.env.validate()?;
        self.train.validate()?;
        Ok(())
    }
}
