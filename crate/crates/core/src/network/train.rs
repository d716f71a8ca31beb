//! Per-sample SGD for small sigmoid MLPs with a softmax cross-entropy loss
//! on identity outputs. Weights are clipped to the fixed-point range after
//! every step.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::fixed::{argmax, sigmoid};
use super::weights::{quantize_weights, Network, WEIGHT_BOUND};
use crate::error::{Error, Result};

pub const MAX_LAYER_WIDTH: usize = 64;

#[derive(Clone, Debug, PartialEq)]
pub struct DenseLayer {
    /// `out × in`, row-major.
    pub w: Vec<f64>,
    pub b: Vec<f64>,
    pub in_dim: usize,
    pub out_dim: usize,
}

impl DenseLayer {
    fn forward(&self, x: &[f64]) -> Vec<f64> {
        (0..self.out_dim)
            .map(|j| {
                let row = &self.w[j * self.in_dim..(j + 1) * self.in_dim];
                row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + self.b[j]
            })
            .collect()
    }
}

/// Real-valued weights before quantization.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainedMlp {
    pub layers: Vec<DenseLayer>,
}

impl TrainedMlp {
    /// Activations per layer: inputs, sigmoid hidden outputs, raw scores.
    fn activations(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let mut acts = vec![x.to_vec()];
        for (k, layer) in self.layers.iter().enumerate() {
            let z = layer.forward(acts.last().expect("nonempty"));
            acts.push(if k + 1 < self.layers.len() {
                z.into_iter().map(sigmoid).collect()
            } else {
                z
            });
        }
        acts
    }

    pub fn scores(&self, x: &[f64]) -> Vec<f64> {
        self.activations(x).pop().expect("nonempty")
    }

    pub fn accuracy(&self, inputs: &[Vec<f64>], labels: &[usize]) -> f64 {
        let hits = inputs
            .iter()
            .zip(labels)
            .filter(|(x, &y)| argmax(&self.scores(x)) == y)
            .count();
        hits as f64 / inputs.len().max(1) as f64
    }

    pub fn quantize(&self) -> Result<Network> {
        let layers = self
            .layers
            .iter()
            .map(|l| quantize_weights(&l.w, &l.b, l.in_dim, l.out_dim))
            .collect::<Result<Vec<_>>>()?;
        Network::new(layers)
    }

    fn is_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.w.iter().chain(&l.b).all(|v| v.is_finite()))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub dims: Vec<usize>,
    pub epochs: usize,
    pub lr: f64,
    pub seed: u64,
}

/// Xavier-uniform initialisation, zero biases.
fn init(dims: &[usize], rng: &mut ChaCha8Rng) -> TrainedMlp {
    let layers = dims
        .windows(2)
        .map(|d| {
            let (i, o) = (d[0], d[1]);
            let a = (6.0 / (i + o) as f64).sqrt();
            DenseLayer {
                w: (0..i * o).map(|_| rng.gen_range(-a..a)).collect(),
                b: vec![0.0; o],
                in_dim: i,
                out_dim: o,
            }
        })
        .collect();
    TrainedMlp { layers }
}

fn sgd_step(net: &mut TrainedMlp, x: &[f64], label: usize, lr: f64) {
    let acts = net.activations(x);
    let scores = acts.last().expect("nonempty");
    let max = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = scores.iter().map(|s| (s - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    // d loss / d z of the output layer
    let mut delta: Vec<f64> = exps
        .iter()
        .enumerate()
        .map(|(k, e)| e / total - f64::from(u8::from(k == label)))
        .collect();
    for k in (0..net.layers.len()).rev() {
        let input = &acts[k];
        let layer = &net.layers[k];
        let back: Option<Vec<f64>> = (k > 0).then(|| {
            (0..layer.in_dim)
                .map(|i| {
                    let g: f64 = (0..layer.out_dim)
                        .map(|j| layer.w[j * layer.in_dim + i] * delta[j])
                        .sum();
                    g * input[i] * (1.0 - input[i])
                })
                .collect()
        });
        let layer = &mut net.layers[k];
        for (j, &d) in delta.iter().enumerate() {
            let row = &mut layer.w[j * layer.in_dim..(j + 1) * layer.in_dim];
            for (w, &x) in row.iter_mut().zip(input) {
                *w = (*w - lr * d * x).clamp(-WEIGHT_BOUND, WEIGHT_BOUND);
            }
            layer.b[j] = (layer.b[j] - lr * d).clamp(-WEIGHT_BOUND, WEIGHT_BOUND);
        }
        if let Some(d) = back {
            delta = d;
        }
    }
}

/// Train on `inputs` (already scaled) with class indices `labels`.
pub fn train_small_mlp(inputs: &[Vec<f64>], labels: &[usize], cfg: &TrainConfig) -> Result<TrainedMlp> {
    if cfg.dims.len() < 2 {
        return Err(Error::Dimension("dims need an input and an output".into()));
    }
    if let Some(&d) = cfg.dims.iter().find(|&&d| d == 0 || d > MAX_LAYER_WIDTH) {
        return Err(Error::Config(format!(
            "layer width {d} outside 1..={MAX_LAYER_WIDTH}"
        )));
    }
    if inputs.is_empty() {
        return Err(Error::Empty("training set is empty"));
    }
    if inputs.len() != labels.len() {
        return Err(Error::Dimension(format!(
            "{} inputs but {} labels",
            inputs.len(),
            labels.len()
        )));
    }
    let classes = cfg.dims[cfg.dims.len() - 1];
    if inputs.iter().any(|x| x.len() != cfg.dims[0]) || labels.iter().any(|&l| l >= classes) {
        return Err(Error::Dimension("sample or label outside the declared dims".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut net = init(&cfg.dims, &mut rng);
    let mut order: Vec<usize> = (0..inputs.len()).collect();
    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        for &k in &order {
            sgd_step(&mut net, &inputs[k], labels[k], cfg.lr);
        }
        if !net.is_finite() {
            return Err(Error::Divergence {
                epoch,
                detail: format!("non-finite weights with lr {}", cfg.lr),
            });
        }
    }
    Ok(net)
}
