//! Diagonal-Gaussian actor and scalar critic.

use nalgebra::DVector;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::mlp::Mlp;
use super::RlError;

pub const LOG_2PI: f64 = 1.837_877_066_409_345_3;

/// Gaussian policy with a state-independent log standard deviation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianPolicy {
    pub mean: Mlp,
    pub log_std: DVector<f64>,
}

impl GaussianPolicy {
    /// Two hidden layers of width `hidden`.
    pub fn new<R: Rng>(
        obs_dim: usize,
        hidden: usize,
        act_dim: usize,
        init_log_std: f64,
        rng: &mut R,
    ) -> Self {
        Self {
            mean: Mlp::new(&[obs_dim, hidden, hidden, act_dim], rng),
            log_std: DVector::from_element(act_dim, init_log_std),
        }
    }

    pub fn obs_dim(&self) -> usize {
        self.mean.input_dim()
    }

    pub fn act_dim(&self) -> usize {
        self.log_std.len()
    }

    pub fn mean_action(&self, obs: &[f64]) -> Result<Vec<f64>, RlError> {
        self.mean.forward_one(obs)
    }

    /// Draws an action and returns it with its exact log-density.
    pub fn sample<R: Rng>(&self, obs: &[f64], rng: &mut R) -> Result<(Vec<f64>, f64), RlError> {
        let mean = self.mean_action(obs)?;
        let action: Vec<f64> = mean
            .iter()
            .zip(self.log_std.iter())
            .map(|(m, ls)| {
                let z: f64 = rng.sample(StandardNormal);
                m + ls.exp() * z
            })
            .collect();
        let lp = gaussian_log_prob(&mean, self.log_std.as_slice(), &action);
        Ok((action, lp))
    }

    pub fn entropy(&self) -> f64 {
        let n = self.act_dim() as f64;
        self.log_std.sum() + 0.5 * n * (1.0 + LOG_2PI)
    }

    pub fn param_count(&self) -> usize {
        self.mean.param_count() + self.log_std.len()
    }

    /// Network parameters followed by the log standard deviations.
    pub fn flatten(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.param_count());
        self.mean.flatten_into(&mut v);
        v.extend_from_slice(self.log_std.as_slice());
        v
    }

    pub fn assign_flat(&mut self, flat: &[f64]) {
        let k = self.mean.assign_flat(flat);
        self.log_std.as_mut_slice().copy_from_slice(&flat[k..]);
    }

    pub fn is_finite(&self) -> bool {
        self.mean.is_finite() && self.log_std.iter().all(|x| x.is_finite())
    }
}

pub fn gaussian_log_prob(mean: &[f64], log_std: &[f64], action: &[f64]) -> f64 {
    mean.iter()
        .zip(log_std)
        .zip(action)
        .map(|((m, ls), a)| {
            let z = (a - m) / ls.exp();
            -0.5 * z * z - ls - 0.5 * LOG_2PI
        })
        .sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValueFunction {
    pub net: Mlp,
}

impl ValueFunction {
    pub fn new<R: Rng>(state_dim: usize, hidden: usize, rng: &mut R) -> Self {
        Self {
            net: Mlp::new(&[state_dim, hidden, hidden, 1], rng),
        }
    }

    pub fn value(&self, state: &[f64]) -> Result<f64, RlError> {
        Ok(self.net.forward_one(state)?[0])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn policy() -> GaussianPolicy {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        GaussianPolicy::new(7, 16, 4, 0.5f64.ln(), &mut rng)
    }

    #[test]
    fn log_prob_of_mean() {
        let p = policy();
        let obs = [0.1, 0.2, -0.3, 0.0, 1.0, 2.0, -1.0];
        let mean = p.mean_action(&obs).unwrap();
        let lp = gaussian_log_prob(&mean, p.log_std.as_slice(), &mean);
        let expected = -p.log_std.sum() - 2.0 * (2.0 * std::f64::consts::PI).ln();
        assert!((lp - expected).abs() < 1e-12);
    }

    #[test]
    fn tiny_std_samples_the_mean() {
        let mut p = policy();
        p.log_std.fill(-40.0);
        let obs = [0.5; 7];
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let (a, _) = p.sample(&obs, &mut rng).unwrap();
        let m = p.mean_action(&obs).unwrap();
        for (x, y) in a.iter().zip(&m) {
            assert!((x - y).abs() < 1e-15);
        }
    }

    #[test]
    fn sampling_is_seeded() {
        let p = policy();
        let obs = [0.5; 7];
        let a = p.sample(&obs, &mut ChaCha8Rng::seed_from_u64(4)).unwrap();
        let b = p.sample(&obs, &mut ChaCha8Rng::seed_from_u64(4)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn entropy_closed_form() {
        let mut p = policy();
        p.log_std = DVector::from_vec(vec![0.1, -0.4, 0.7, -1.2]);
        let expected: f64 = p
            .log_std
            .iter()
            .map(|ls| {
                0.5 * (2.0 * std::f64::consts::PI * std::f64::consts::E * (2.0 * ls).exp()).ln()
            })
            .sum();
        assert!((p.entropy() - expected).abs() < 1e-9);
    }
}
