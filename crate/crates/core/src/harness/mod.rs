//! Experiment orchestration: configuration, scripted baselines, evaluation
//! and report generation.

pub mod baselines;
pub mod config;
pub mod eval;
pub mod report;
pub mod trajectory;

use thiserror::Error;

use crate::env::EnvError;
use crate::replay::ReplayError;
use crate::rl::RlError;
use crate::variant::NetworkVariant;
use crate::world::WorldError;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid experiment config: {0}")]
    Config(String),
    #[error("checkpoint is for variant {found}, expected {expected}")]
    CheckpointMismatch {
        expected: NetworkVariant,
        found: NetworkVariant,
    },
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Rl(#[from] RlError),
    #[error(transparent)]
    Replay(#[from] ReplayError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl From<WorldError> for HarnessError {
    fn from(e: WorldError) -> Self {
        HarnessError::Env(EnvError::World(e))
    }
}

use config::ExperimentConfig;
use eval::{run_eval, Controller, EvalConfig, MetricsReport};
use trajectory::TestTrajectory;

use crate::replay::ReplayRecord;
use crate::rl::checkpoint::Checkpoint;

/// Evaluation settings of an experiment on the bundled test walk.
pub fn eval_config(cfg: &ExperimentConfig) -> EvalConfig {
    let plan = TestTrajectory::builtin().plan;
    if cfg.seeds.is_empty() {
        EvalConfig::seeded(cfg.runs, cfg.duration_s, cfg.seed, plan)
    } else {
        EvalConfig {
            runs: cfg.runs,
            duration_s: cfg.duration_s,
            seeds: cfg.seeds.clone(),
            plan,
        }
    }
}

/// Evaluates a trained checkpoint under the environment it was trained in.
pub fn evaluate_checkpoint(
    ck: &Checkpoint,
    expected: Option<NetworkVariant>,
    cfg: &ExperimentConfig,
    threads: usize,
) -> Result<(MetricsReport, Vec<Vec<ReplayRecord>>), HarnessError> {
    if let Some(v) = expected {
        if v != ck.variant {
            return Err(HarnessError::CheckpointMismatch {
                expected: v,
                found: ck.variant,
            });
        }
    }
    run_eval(
        ck.variant,
        Controller::Policy(&ck.policy),
        &ck.env,
        &eval_config(cfg),
        &format!("network {}", ck.variant),
        threads,
    )
}
