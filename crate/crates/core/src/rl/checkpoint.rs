use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::policy::{GaussianPolicy, ValueFunction};
use super::ppo::Optimizers;
use super::train::TrainConfig;
use super::RlError;
use crate::env::EnvConfig;
use crate::variant::NetworkVariant;

pub const CHECKPOINT_VERSION: u32 = 1;

/// Everything needed to resume training exactly where it stopped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub version: u32,
    pub variant: NetworkVariant,
    pub env: EnvConfig,
    pub train: TrainConfig,
    pub iteration: u64,
    pub policy: GaussianPolicy,
    pub critic: ValueFunction,
    pub optimizers: Optimizers,
    pub rng: ChaCha8Rng,
}

impl Checkpoint {
    pub fn save(&self, path: &Path) -> Result<(), RlError> {
        let tmp = path.with_extension("json.tmp");
        {
            let mut w = BufWriter::new(File::create(&tmp)?);
            serde_json::to_writer(&mut w, self)?;
            w.flush()?;
        }
        std::fs::rename(&tmp, path)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, RlError> {
        let ck: Checkpoint = serde_json::from_reader(BufReader::new(File::open(path)?))?;
        if ck.version != CHECKPOINT_VERSION {
            return Err(RlError::CheckpointVersion(ck.version));
        }
        Ok(ck)
    }

    pub fn expect_variant(&self, variant: NetworkVariant) -> Result<(), RlError> {
        if self.variant != variant {
            return Err(RlError::CheckpointMismatch {
                expected: variant,
                found: self.variant,
            });
        }
        Ok(())
    }
}
