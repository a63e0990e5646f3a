//! From-scratch PPO: networks, optimizer, advantage estimation, parallel
//! rollouts and the training loop.

pub mod adam;
pub mod checkpoint;
pub mod curriculum;
pub mod gae;
pub mod mlp;
pub mod policy;
pub mod ppo;
pub mod rollout;
pub mod train;

use thiserror::Error;

use crate::env::EnvError;
use crate::variant::NetworkVariant;

pub use ppo::UpdateDiagnostics;

#[derive(Debug, Error)]
pub enum RlError {
    #[error("input has {got} rows, network expects {expected}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("sequence lengths differ")]
    LengthMismatch,
    #[error("non-finite loss in update: {diagnostics:?}")]
    NonFiniteLoss { diagnostics: UpdateDiagnostics },
    #[error("invalid training config: {0}")]
    Config(String),
    #[error("checkpoint is for variant {found}, expected {expected}")]
    CheckpointMismatch {
        expected: NetworkVariant,
        found: NetworkVariant,
    },
    #[error("unsupported checkpoint version {0}")]
    CheckpointVersion(u32),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Worker threads for rollouts and evaluation: `AIRCAP_ARENA_THREADS` if set,
/// otherwise the available parallelism.
pub fn worker_threads() -> usize {
    std::env::var("AIRCAP_ARENA_THREADS")
        .ok()
        .and_then(|s| s.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}
