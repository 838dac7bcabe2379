//! Fully connected network with rectifier hidden layers, one logistic
//! output, and cross-entropy loss, trained by mini-batch gradient descent.
//!
//! Parameters live in one flat vector (weights then bias per layer) so the
//! analytic gradient can be checked against finite differences directly.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpNet {
    /// Layer widths from input to the single output.
    pub sizes: Vec<usize>,
    pub params: Vec<f64>,
}

fn param_count(sizes: &[usize]) -> usize {
    sizes.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
}

impl MlpNet {
    /// Uniform Xavier initialization.
    pub fn init(input: usize, hidden: &[usize], rng: &mut ChaCha8Rng) -> Self {
        let mut sizes = vec![input];
        sizes.extend_from_slice(hidden);
        sizes.push(1);
        let mut params = Vec::with_capacity(param_count(&sizes));
        for w in sizes.windows(2) {
            let bound = (6.0 / (w[0] + w[1]) as f64).sqrt();
            for _ in 0..w[0] * w[1] {
                params.push(rng.gen_range(-bound..bound));
            }
            params.extend(std::iter::repeat(0.0).take(w[1]));
        }
        MlpNet { sizes, params }
    }

    /// Class-1 probability for one row.
    pub fn forward(&self, row: &[f64]) -> f64 {
        let mut activation = row.to_vec();
        let mut offset = 0;
        for (layer, w) in self.sizes.windows(2).enumerate() {
            let (n_in, n_out) = (w[0], w[1]);
            let weights = &self.params[offset..offset + n_in * n_out];
            let biases = &self.params[offset + n_in * n_out..offset + n_in * n_out + n_out];
            offset += n_in * n_out + n_out;
            let last = layer == self.sizes.len() - 2;
            let mut next = vec![0.0; n_out];
            for (j, out) in next.iter_mut().enumerate() {
                let mut z = biases[j];
                for (i, a) in activation.iter().enumerate() {
                    z += weights[j * n_in + i] * a;
                }
                *out = if last { logistic(z) } else { z.max(0.0) };
            }
            activation = next;
        }
        activation[0]
    }

    /// Mean cross-entropy over the batch and its gradient in the flat
    /// parameter layout.
    pub fn loss_and_grad(&self, x: &[Vec<f64>], y: &[u8]) -> (f64, Vec<f64>) {
        let mut loss = 0.0;
        let mut grad = vec![0.0; self.params.len()];
        let scale = 1.0 / x.len() as f64;
        for (row, &label) in x.iter().zip(y) {
            // Forward pass keeping activations and offsets per layer.
            let mut activations = vec![row.to_vec()];
            let mut offsets = Vec::new();
            let mut offset = 0;
            for (layer, w) in self.sizes.windows(2).enumerate() {
                let (n_in, n_out) = (w[0], w[1]);
                offsets.push(offset);
                let weights = &self.params[offset..offset + n_in * n_out];
                let biases = &self.params[offset + n_in * n_out..offset + n_in * n_out + n_out];
                offset += n_in * n_out + n_out;
                let last = layer == self.sizes.len() - 2;
                let prev = activations.last().expect("seeded with the input row");
                let mut next = vec![0.0; n_out];
                for (j, out) in next.iter_mut().enumerate() {
                    let mut z = biases[j];
                    for (i, a) in prev.iter().enumerate() {
                        z += weights[j * n_in + i] * a;
                    }
                    *out = if last { logistic(z) } else { z.max(0.0) };
                }
                activations.push(next);
            }
            let p = activations.last().expect("network has an output layer")[0].clamp(1e-12, 1.0 - 1e-12);
            let target = label as f64;
            loss -= scale * (target * p.ln() + (1.0 - target) * (1.0 - p).ln());

            // Backward pass; logistic + cross-entropy collapse to p - y.
            let mut delta = vec![scale * (p - target)];
            for layer in (0..self.sizes.len() - 1).rev() {
                let (n_in, n_out) = (self.sizes[layer], self.sizes[layer + 1]);
                let offset = offsets[layer];
                let prev = &activations[layer];
                for j in 0..n_out {
                    for i in 0..n_in {
                        grad[offset + j * n_in + i] += delta[j] * prev[i];
                    }
                    grad[offset + n_in * n_out + j] += delta[j];
                }
                if layer == 0 {
                    break;
                }
                let weights = &self.params[offset..offset + n_in * n_out];
                let mut below = vec![0.0; n_in];
                for (i, b) in below.iter_mut().enumerate() {
                    let mut acc = 0.0;
                    for (j, dj) in delta.iter().enumerate() {
                        acc += weights[j * n_in + i] * dj;
                    }
                    // Rectifier gate from the forward activation.
                    *b = if prev[i] > 0.0 { acc } else { 0.0 };
                }
                delta = below;
            }
        }
        (loss, grad)
    }
}

pub(crate) struct MlpParams {
    pub hidden: Vec<usize>,
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch: usize,
}

pub(crate) fn fit_mlp(x: &[Vec<f64>], y: &[u8], params: &MlpParams, seed: u64) -> MlpNet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut net = MlpNet::init(x[0].len(), &params.hidden, &mut rng);
    let mut order: Vec<usize> = (0..x.len()).collect();
    for _ in 0..params.epochs {
        order.shuffle(&mut rng);
        for chunk in order.chunks(params.batch) {
            let bx: Vec<Vec<f64>> = chunk.iter().map(|&i| x[i].clone()).collect();
            let by: Vec<u8> = chunk.iter().map(|&i| y[i]).collect();
            let (_, grad) = net.loss_and_grad(&bx, &by);
            for (p, g) in net.params.iter_mut().zip(grad) {
                *p -= params.learning_rate * g;
            }
        }
    }
    net
}

fn logistic(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}
