//! Outer training loop: collect, estimate advantages, update, log, checkpoint.

use std::fs::{File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::checkpoint::{Checkpoint, CHECKPOINT_VERSION};
use super::curriculum::transfer_policy;
use super::policy::{GaussianPolicy, ValueFunction};
use super::ppo::{ppo_update, Optimizers, PpoConfig};
use super::rollout::{collect_rollouts, parallel_map};
use super::RlError;
use crate::env::{EnvConfig, MocapEnv};
use crate::rewards::RewardBreakdown;
use crate::variant::NetworkVariant;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub gamma: f64,
    pub lambda: f64,
    #[serde(flatten)]
    pub ppo: PpoConfig,
    pub iterations: u64,
    pub workers: usize,
    /// Write a checkpoint every this many iterations; 0 disables periodic checkpoints.
    pub checkpoint_every: u64,
    pub seed: u64,
    pub init_log_std: f64,
    /// Overrides the variant's hidden width.
    pub hidden: Option<usize>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            gamma: 0.99,
            lambda: 0.95,
            ppo: PpoConfig::default(),
            iterations: 200,
            workers: 5,
            checkpoint_every: 50,
            seed: 0,
            init_log_std: 0.5f64.ln(),
            hidden: None,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), RlError> {
        let bad = |m: &str| Err(RlError::Config(m.to_string()));
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return bad("gamma must be in (0, 1]");
        }
        if !(0.0..=1.0).contains(&self.lambda) {
            return bad("lambda must be in [0, 1]");
        }
        if !(self.ppo.clip > 0.0) {
            return bad("clip ratio must be positive");
        }
        if !(self.ppo.learning_rate >= 0.0) {
            return bad("learning rate must be non-negative");
        }
        if self.workers == 0 || self.ppo.minibatch == 0 {
            return bad("workers and minibatch must be at least 1");
        }
        if !self.init_log_std.is_finite() {
            return bad("initial log-stddev must be finite");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationMetrics {
    pub iteration: u64,
    pub mean_ep_reward: f64,
    pub components: [Option<f64>; 8],
    pub actor_loss: f64,
    pub critic_loss: f64,
    pub clip_fraction: f64,
    pub entropy: f64,
    pub approx_kl: f64,
}

pub fn metrics_header() -> String {
    let mut cols = vec!["iteration".to_string(), "mean_ep_reward".to_string()];
    cols.extend(
        RewardBreakdown::COMPONENTS
            .iter()
            .map(|c| format!("mean_{c}")),
    );
    cols.extend(
        [
            "actor_loss",
            "critic_loss",
            "clip_fraction",
            "entropy",
            "approx_kl",
        ]
        .map(String::from),
    );
    cols.join(",")
}

impl IterationMetrics {
    /// Absent components are empty cells.
    pub fn csv_row(&self) -> String {
        let mut cells = vec![self.iteration.to_string(), self.mean_ep_reward.to_string()];
        cells.extend(
            self.components
                .iter()
                .map(|c| c.map_or(String::new(), |v| v.to_string())),
        );
        cells.extend(
            [
                self.actor_loss,
                self.critic_loss,
                self.clip_fraction,
                self.entropy,
                self.approx_kl,
            ]
            .map(|v| v.to_string()),
        );
        cells.join(",")
    }
}

pub fn write_metrics_csv<W: Write>(mut w: W, rows: &[IterationMetrics]) -> std::io::Result<()> {
    writeln!(w, "{}", metrics_header())?;
    for r in rows {
        writeln!(w, "{}", r.csv_row())?;
    }
    w.flush()
}

pub struct Trainer {
    pub variant: NetworkVariant,
    pub env: EnvConfig,
    pub config: TrainConfig,
    pub policy: GaussianPolicy,
    pub critic: ValueFunction,
    pub optimizers: Optimizers,
    pub iteration: u64,
    rng: ChaCha8Rng,
}

impl Trainer {
    pub fn new(
        variant: NetworkVariant,
        env: EnvConfig,
        config: TrainConfig,
    ) -> Result<Self, RlError> {
        config.validate()?;
        env.validate()?;
        let hidden = config.hidden.unwrap_or(variant.hidden_width());
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let policy = GaussianPolicy::new(
            variant.observation_layout().len(),
            hidden,
            variant.action_dim(),
            config.init_log_std,
            &mut rng,
        );
        let critic = ValueFunction::new(MocapEnv::state_dim(variant), hidden, &mut rng);
        let optimizers = Optimizers::new(&policy, &critic);
        Ok(Self {
            variant,
            env,
            config,
            policy,
            critic,
            optimizers,
            iteration: 0,
            rng,
        })
    }

    /// Initializes the actor from a policy trained on `source_variant`.
    pub fn warm_start(
        &mut self,
        source: &GaussianPolicy,
        source_variant: NetworkVariant,
    ) -> Result<(), RlError> {
        transfer_policy(source, source_variant, &mut self.policy, self.variant)
    }

    pub fn from_checkpoint(ck: Checkpoint) -> Result<Self, RlError> {
        ck.train.validate()?;
        Ok(Self {
            variant: ck.variant,
            env: ck.env,
            config: ck.train,
            policy: ck.policy,
            critic: ck.critic,
            optimizers: ck.optimizers,
            iteration: ck.iteration,
            rng: ck.rng,
        })
    }

    pub fn checkpoint(&self) -> Checkpoint {
        Checkpoint {
            version: CHECKPOINT_VERSION,
            variant: self.variant,
            env: self.env,
            train: self.config,
            iteration: self.iteration,
            policy: self.policy.clone(),
            critic: self.critic.clone(),
            optimizers: self.optimizers.clone(),
            rng: self.rng.clone(),
        }
    }

    /// Episode seeds of the workers for the current iteration.
    pub fn worker_seeds(&self) -> Vec<u64> {
        let mut r = ChaCha8Rng::seed_from_u64(self.config.seed);
        r.set_stream(self.iteration + 1);
        (0..self.config.workers).map(|_| r.next_u64()).collect()
    }

    /// One collect/update cycle. On failure the parameters are left as they
    /// were before the cycle.
    pub fn iterate(&mut self, threads: usize) -> Result<IterationMetrics, RlError> {
        let variant = self.variant;
        let env = self.env;
        let factory = move |s| MocapEnv::reset(variant, &env, s);
        let batch = collect_rollouts(
            &self.policy,
            &self.critic,
            &factory,
            &self.worker_seeds(),
            self.config.gamma,
            self.config.lambda,
            threads,
        )?;
        let saved = (
            self.policy.clone(),
            self.critic.clone(),
            self.optimizers.clone(),
            self.rng.clone(),
        );
        let diag = match ppo_update(
            &mut self.policy,
            &mut self.critic,
            &mut self.optimizers,
            &batch,
            &self.config.ppo,
            &mut self.rng,
        ) {
            Ok(d) => d,
            Err(e) => {
                (self.policy, self.critic, self.optimizers, self.rng) = saved;
                return Err(e);
            }
        };
        self.iteration += 1;
        Ok(IterationMetrics {
            iteration: self.iteration,
            mean_ep_reward: batch.mean_episode_reward(),
            components: batch.component_means(),
            actor_loss: diag.actor_loss,
            critic_loss: diag.critic_loss,
            clip_fraction: diag.clip_fraction,
            entropy: diag.entropy,
            approx_kl: diag.approx_kl,
        })
    }

    /// Trains until `config.iterations` is reached. With an output directory,
    /// appends to `metrics.csv` and writes `checkpoint.json` periodically, at
    /// the end, and before returning an error.
    pub fn run(
        &mut self,
        out_dir: Option<&Path>,
        threads: usize,
        mut on_iteration: impl FnMut(&IterationMetrics),
    ) -> Result<Vec<IterationMetrics>, RlError> {
        let mut log = match out_dir {
            Some(dir) => {
                std::fs::create_dir_all(dir)?;
                let path = dir.join("metrics.csv");
                let fresh = self.iteration == 0 || !path.exists();
                let f = if fresh {
                    File::create(&path)?
                } else {
                    OpenOptions::new().append(true).open(&path)?
                };
                let mut w = BufWriter::new(f);
                if fresh {
                    writeln!(w, "{}", metrics_header())?;
                }
                Some(w)
            }
            None => None,
        };
        let mut metrics = Vec::new();
        while self.iteration < self.config.iterations {
            let m = match self.iterate(threads) {
                Ok(m) => m,
                Err(e) => {
                    if let Some(dir) = out_dir {
                        self.checkpoint().save(&dir.join("checkpoint.json"))?;
                    }
                    return Err(e);
                }
            };
            if let Some(w) = log.as_mut() {
                writeln!(w, "{}", m.csv_row())?;
                w.flush()?;
            }
            on_iteration(&m);
            metrics.push(m);
            let every = self.config.checkpoint_every;
            if let Some(dir) = out_dir {
                if every > 0 && self.iteration.is_multiple_of(every) {
                    self.checkpoint().save(&dir.join("checkpoint.json"))?;
                }
            }
        }
        if let Some(dir) = out_dir {
            self.checkpoint().save(&dir.join("checkpoint.json"))?;
        }
        Ok(metrics)
    }
}

/// Mean per-agent episode reward of uniformly random normalized actions.
pub fn random_policy_baseline(
    variant: NetworkVariant,
    env: &EnvConfig,
    episodes: usize,
    seed: u64,
    threads: usize,
) -> Result<f64, RlError> {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let seeds: Vec<u64> = (0..episodes).map(|_| r.next_u64()).collect();
    let totals = parallel_map(&seeds, threads, |_, s| -> Result<Vec<f64>, RlError> {
        let mut e = MocapEnv::reset(variant, env, s)?;
        let mut rng = ChaCha8Rng::seed_from_u64(s);
        rng.set_stream(super::rollout::POLICY_STREAM);
        let k = variant.agents();
        let mut sums = vec![0.0; k];
        loop {
            let raw: Vec<Vec<f64>> = (0..k)
                .map(|_| {
                    (0..variant.action_dim())
                        .map(|_| rng.random_range(-1.0..=1.0))
                        .collect()
                })
                .collect();
            let out = e.step_policy(&raw)?;
            for (s, r) in sums.iter_mut().zip(&out.rewards) {
                *s += r.total;
            }
            if out.events.done {
                return Ok(sums);
            }
        }
    });
    let mut all = Vec::new();
    for t in totals {
        all.extend(t?);
    }
    Ok(all.iter().sum::<f64>() / all.len().max(1) as f64)
}
