//! Clipped-surrogate policy update and value regression.

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::adam::{adam_step, AdamState};
use super::policy::{gaussian_log_prob, GaussianPolicy, ValueFunction};
use super::rollout::{RolloutBatch, Transition};
use super::RlError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PpoConfig {
    pub clip: f64,
    pub learning_rate: f64,
    pub epochs: usize,
    pub minibatch: usize,
    pub entropy_coef: f64,
    pub value_coef: f64,
    pub max_grad_norm: f64,
}

impl Default for PpoConfig {
    fn default() -> Self {
        Self {
            clip: 0.2,
            learning_rate: 3e-4,
            epochs: 4,
            minibatch: 256,
            entropy_coef: 0.01,
            value_coef: 0.5,
            max_grad_norm: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Optimizers {
    pub actor: AdamState,
    pub critic: AdamState,
}

impl Optimizers {
    pub fn new(policy: &GaussianPolicy, critic: &ValueFunction) -> Self {
        Self {
            actor: AdamState::new(policy.param_count()),
            critic: AdamState::new(critic.net.param_count()),
        }
    }
}

/// Averages over all minibatches of an update.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct UpdateDiagnostics {
    pub actor_loss: f64,
    pub critic_loss: f64,
    pub clip_fraction: f64,
    pub approx_kl: f64,
    pub entropy: f64,
    /// Largest |ratio - 1| in the first minibatch, measured before any step.
    pub initial_ratio_deviation: f64,
    pub minibatches: usize,
}

/// Per-sample clipped objective `min(r A, clip(r, 1-eps, 1+eps) A)` and its
/// derivative with respect to `r`.
pub fn clipped_objective(ratio: f64, advantage: f64, clip: f64) -> (f64, f64) {
    let unclipped = ratio * advantage;
    let clipped = ratio.clamp(1.0 - clip, 1.0 + clip) * advantage;
    if unclipped <= clipped {
        (unclipped, advantage)
    } else {
        (clipped, 0.0)
    }
}

/// Advantages rescaled to zero mean and unit standard deviation.
pub fn normalized_advantages(batch: &RolloutBatch) -> Vec<f64> {
    let n = batch.len() as f64;
    let mean = batch.transitions.iter().map(|t| t.advantage).sum::<f64>() / n;
    let var = batch
        .transitions
        .iter()
        .map(|t| (t.advantage - mean).powi(2))
        .sum::<f64>()
        / n;
    let std = var.sqrt() + 1e-8;
    batch
        .transitions
        .iter()
        .map(|t| (t.advantage - mean) / std)
        .collect()
}

pub fn ppo_update<R: Rng>(
    policy: &mut GaussianPolicy,
    critic: &mut ValueFunction,
    opt: &mut Optimizers,
    batch: &RolloutBatch,
    cfg: &PpoConfig,
    rng: &mut R,
) -> Result<UpdateDiagnostics, RlError> {
    let mut diag = UpdateDiagnostics::default();
    if batch.is_empty() {
        return Ok(diag);
    }
    let advantages = normalized_advantages(batch);
    let mut order: Vec<usize> = (0..batch.len()).collect();
    let mb = cfg.minibatch.max(1);
    for _ in 0..cfg.epochs {
        order.shuffle(rng);
        for idx in order.chunks(mb) {
            let first = diag.minibatches == 0;
            let samples: Vec<&Transition> = idx.iter().map(|&i| &batch.transitions[i]).collect();
            let adv: Vec<f64> = idx.iter().map(|&i| advantages[i]).collect();
            let a = actor_step(
                policy,
                &mut opt.actor,
                &samples,
                &adv,
                cfg,
                first,
                &mut diag,
            )?;
            let c = critic_step(critic, &mut opt.critic, &samples, cfg)?;
            diag.actor_loss += a;
            diag.critic_loss += c;
            diag.minibatches += 1;
            if !(a.is_finite() && c.is_finite()) {
                return Err(RlError::NonFiniteLoss { diagnostics: diag });
            }
        }
    }
    let n = diag.minibatches.max(1) as f64;
    diag.actor_loss /= n;
    diag.critic_loss /= n;
    diag.clip_fraction /= n;
    diag.approx_kl /= n;
    diag.entropy /= n;
    Ok(diag)
}

fn columns(samples: &[&Transition], f: impl Fn(&Transition) -> &[f64]) -> DMatrix<f64> {
    let rows = f(samples[0]).len();
    let mut m = DMatrix::zeros(rows, samples.len());
    for (j, s) in samples.iter().enumerate() {
        m.column_mut(j).copy_from_slice(f(s));
    }
    m
}

fn actor_step(
    policy: &mut GaussianPolicy,
    state: &mut AdamState,
    samples: &[&Transition],
    adv: &[f64],
    cfg: &PpoConfig,
    first: bool,
    diag: &mut UpdateDiagnostics,
) -> Result<f64, RlError> {
    let b = samples.len() as f64;
    let obs = columns(samples, |t| &t.observation);
    let cache = policy.mean.forward(&obs)?;
    let means = cache.output();
    let log_std = policy.log_std.as_slice().to_vec();
    let inv_var: Vec<f64> = log_std.iter().map(|ls| (-2.0 * ls).exp()).collect();
    let act_dim = log_std.len();

    let mut grad_mean = DMatrix::zeros(act_dim, samples.len());
    let mut grad_log_std = vec![0.0; act_dim];
    let mut objective = 0.0;
    let mut clipped = 0usize;
    let mut kl = 0.0;
    let mut max_dev: f64 = 0.0;
    for (j, (s, &a_hat)) in samples.iter().zip(adv).enumerate() {
        let mean = means.column(j);
        let logp = gaussian_log_prob(mean.as_slice(), &log_std, &s.action);
        let ratio = (logp - s.log_prob).exp();
        max_dev = max_dev.max((ratio - 1.0).abs());
        let (obj, d_ratio) = clipped_objective(ratio, a_hat, cfg.clip);
        debug_assert!(
            obj <= (ratio * a_hat)
                .max((1.0 - cfg.clip) * a_hat)
                .max((1.0 + cfg.clip) * a_hat)
        );
        objective += obj;
        if (ratio - 1.0).abs() > cfg.clip {
            clipped += 1;
        }
        kl += (ratio - 1.0) - (logp - s.log_prob);
        // d loss / d logp for loss = -mean(obj)
        let g = -d_ratio * ratio / b;
        for k in 0..act_dim {
            let diff = s.action[k] - mean[k];
            grad_mean[(k, j)] = g * diff * inv_var[k];
            grad_log_std[k] += g * (diff * diff * inv_var[k] - 1.0);
        }
    }
    let entropy = policy.entropy();
    for g in &mut grad_log_std {
        *g -= cfg.entropy_coef;
    }
    let loss = -objective / b - cfg.entropy_coef * entropy;
    if first {
        diag.initial_ratio_deviation = max_dev;
    }
    diag.clip_fraction += clipped as f64 / b;
    diag.approx_kl += kl / b;
    diag.entropy += entropy;
    if !loss.is_finite() {
        return Ok(loss);
    }

    let (grads, _) = policy.mean.backward(&cache, &grad_mean)?;
    let mut flat = grads.flatten();
    flat.extend_from_slice(&grad_log_std);
    clip_norm(&mut flat, cfg.max_grad_norm);
    let mut params = policy.flatten();
    adam_step(&mut params, &flat, state, cfg.learning_rate);
    policy.assign_flat(&params);
    Ok(loss)
}

fn critic_step(
    critic: &mut ValueFunction,
    state: &mut AdamState,
    samples: &[&Transition],
    cfg: &PpoConfig,
) -> Result<f64, RlError> {
    let b = samples.len() as f64;
    let states = columns(samples, |t| &t.state);
    let cache = critic.net.forward(&states)?;
    let values = cache.output();
    let mut grad = DMatrix::zeros(1, samples.len());
    let mut loss = 0.0;
    for (j, s) in samples.iter().enumerate() {
        let e = values[(0, j)] - s.ret;
        loss += e * e;
        grad[(0, j)] = cfg.value_coef * 2.0 * e / b;
    }
    loss /= b;
    if !loss.is_finite() {
        return Ok(loss);
    }
    let (grads, _) = critic.net.backward(&cache, &grad)?;
    let mut flat = grads.flatten();
    clip_norm(&mut flat, cfg.max_grad_norm);
    let mut params = critic.net.flatten();
    adam_step(&mut params, &flat, state, cfg.learning_rate);
    critic.net.assign_flat(&params);
    Ok(loss)
}

fn clip_norm(g: &mut [f64], max_norm: f64) {
    let norm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > max_norm && max_norm > 0.0 {
        let s = max_norm / norm;
        g.iter_mut().for_each(|x| *x *= s);
    }
}
