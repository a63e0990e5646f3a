//! Fully connected networks with rectified-linear hidden layers and exact
//! reverse-mode gradients. Batches are stored column-wise: one sample per column.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::RlError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dense {
    /// `out x in`
    pub weights: DMatrix<f64>,
    pub bias: DVector<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    pub layers: Vec<Dense>,
}

/// Layer inputs recorded by a forward pass; the last entry is the output.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    pub activations: Vec<DMatrix<f64>>,
}

impl ForwardCache {
    pub fn output(&self) -> &DMatrix<f64> {
        self.activations
            .last()
            .expect("cache holds at least the input")
    }
}

impl Mlp {
    /// Fan-in scaled uniform weights, zero biases.
    pub fn new<R: Rng>(widths: &[usize], rng: &mut R) -> Self {
        let layers = widths
            .windows(2)
            .map(|w| {
                let bound = 1.0 / (w[0] as f64).sqrt();
                Dense {
                    weights: DMatrix::from_fn(w[1], w[0], |_, _| rng.random_range(-bound..bound)),
                    bias: DVector::zeros(w[1]),
                }
            })
            .collect();
        Self { layers }
    }

    pub fn zeros(widths: &[usize]) -> Self {
        Self {
            layers: widths
                .windows(2)
                .map(|w| Dense {
                    weights: DMatrix::zeros(w[1], w[0]),
                    bias: DVector::zeros(w[1]),
                })
                .collect(),
        }
    }

    pub fn zeros_like(&self) -> Self {
        Self::zeros(&self.widths())
    }

    pub fn widths(&self) -> Vec<usize> {
        let mut w = vec![self.input_dim()];
        w.extend(self.layers.iter().map(|l| l.weights.nrows()));
        w
    }

    pub fn input_dim(&self) -> usize {
        self.layers.first().map_or(0, |l| l.weights.ncols())
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().map_or(0, |l| l.weights.nrows())
    }

    pub fn param_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.len() + l.bias.len())
            .sum()
    }

    pub fn forward(&self, input: &DMatrix<f64>) -> Result<ForwardCache, RlError> {
        if input.nrows() != self.input_dim() {
            return Err(RlError::ShapeMismatch {
                expected: self.input_dim(),
                got: input.nrows(),
            });
        }
        let mut activations = Vec::with_capacity(self.layers.len() + 1);
        activations.push(input.clone());
        let last = self.layers.len() - 1;
        for (i, layer) in self.layers.iter().enumerate() {
            let mut z = &layer.weights * activations.last().unwrap();
            for mut col in z.column_iter_mut() {
                col += &layer.bias;
            }
            if i < last {
                z.apply(|x| *x = x.max(0.0));
            }
            activations.push(z);
        }
        Ok(ForwardCache { activations })
    }

    pub fn forward_one(&self, input: &[f64]) -> Result<Vec<f64>, RlError> {
        let x = DMatrix::from_column_slice(input.len(), 1, input);
        Ok(self.forward(&x)?.output().as_slice().to_vec())
    }

    /// Gradients of a scalar loss given `d loss / d output`. Returns parameter
    /// gradients (same layout as `self`) and the input gradient. A hidden unit
    /// whose pre-activation is exactly zero passes no gradient.
    pub fn backward(
        &self,
        cache: &ForwardCache,
        grad_output: &DMatrix<f64>,
    ) -> Result<(Mlp, DMatrix<f64>), RlError> {
        let out = cache.output();
        if grad_output.shape() != out.shape() {
            return Err(RlError::ShapeMismatch {
                expected: out.nrows(),
                got: grad_output.nrows(),
            });
        }
        let mut grads = Vec::with_capacity(self.layers.len());
        let mut delta = grad_output.clone();
        let last = self.layers.len() - 1;
        for (l, layer) in self.layers.iter().enumerate().rev() {
            if l < last {
                delta.zip_apply(&cache.activations[l + 1], |d, a| {
                    if a <= 0.0 {
                        *d = 0.0
                    }
                });
            }
            let gw = &delta * cache.activations[l].transpose();
            let gb = delta.column_sum();
            delta = layer.weights.transpose() * &delta;
            grads.push(Dense {
                weights: gw,
                bias: gb,
            });
        }
        grads.reverse();
        Ok((Mlp { layers: grads }, delta))
    }

    /// Parameters in a fixed order: per layer, column-major weights then bias.
    pub fn flatten_into(&self, out: &mut Vec<f64>) {
        for l in &self.layers {
            out.extend_from_slice(l.weights.as_slice());
            out.extend_from_slice(l.bias.as_slice());
        }
    }

    pub fn flatten(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.param_count());
        self.flatten_into(&mut v);
        v
    }

    /// Inverse of `flatten_into`; returns the number of values consumed.
    pub fn assign_flat(&mut self, flat: &[f64]) -> usize {
        let mut k = 0;
        for l in &mut self.layers {
            let n = l.weights.len();
            l.weights.as_mut_slice().copy_from_slice(&flat[k..k + n]);
            k += n;
            let n = l.bias.len();
            l.bias.as_mut_slice().copy_from_slice(&flat[k..k + n]);
            k += n;
        }
        k
    }

    pub fn is_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.weights.iter().chain(l.bias.iter()).all(|x| x.is_finite()))
    }
}
