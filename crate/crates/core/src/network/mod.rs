//! Integer stochastic neurons composed into a feed-forward sigmoid network.
//!
//! Each hidden neuron multiplies unipolar input bits into bipolar integer
//! weight streams, sums the products and a bias stream in a tree adder,
//! clamps the sum to `[-m', m']` and passes it through an integral tanh
//! FSM whose output, read as unipolar, is the sigmoid activation. The
//! classification layer skips the FSM and accumulates adder outputs into
//! signed per-class counters.

pub mod calibrate;
pub mod data;
pub mod fixed;
pub mod idx;
pub mod stochastic;
pub mod train;
pub mod weights;
pub mod weights_file;

pub use calibrate::{calibrate_network, calibrate_range, m_prime_for_coverage, AdderHistogram, LayerCalibration};
pub use fixed::{argmax, fixed_point_infer, fixed_point_label, sigmoid};
pub use stochastic::{stochastic_infer, stochastic_neuron, InferenceResult, StochasticEngine};
pub use weights::{quantize_weights, FixedPointValue, LayerWeights, Network};

use crate::error::{Error, Result};
use crate::lfsr::{SourceKind, DEFAULT_WIDTH};

/// Engine parameters. `m_prime` and `n_tanh` hold one entry per hidden
/// layer.
#[derive(Clone, Debug, PartialEq)]
pub struct NetworkConfig {
    pub layer_dims: Vec<usize>,
    pub m_weight: u32,
    pub stream_length: usize,
    pub n_tanh: Vec<f64>,
    pub m_prime: Vec<u32>,
    pub source: SourceKind,
    pub lfsr_width: u32,
}

impl NetworkConfig {
    /// Uncalibrated defaults: `m' = 4·m_weight` and `n_tanh = 4 / m_weight`,
    /// which puts the tanh slope at the weight-stream scale of 1/4.
    pub fn new(layer_dims: Vec<usize>, m_weight: u32, stream_length: usize) -> Result<Self> {
        if layer_dims.len() < 2 {
            return Err(Error::Dimension("layer_dims needs an input and an output".into()));
        }
        let hidden = layer_dims.len() - 2;
        let cfg = Self {
            layer_dims,
            m_weight,
            stream_length,
            n_tanh: vec![4.0 / m_weight.max(1) as f64; hidden],
            m_prime: vec![4 * m_weight; hidden],
            source: SourceKind::Lfsr,
            lfsr_width: DEFAULT_WIDTH,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn for_network(net: &Network, m_weight: u32, stream_length: usize) -> Result<Self> {
        Self::new(net.layer_dims(), m_weight, stream_length)
    }

    pub fn with_source(mut self, source: SourceKind) -> Self {
        self.source = source;
        self
    }

    pub fn with_stream_length(mut self, stream_length: usize) -> Self {
        self.stream_length = stream_length;
        self
    }

    pub fn hidden_layers(&self) -> usize {
        self.layer_dims.len() - 2
    }

    /// FSM state count of hidden layer `k`: `m'·n_tanh` rounded up to an
    /// even number, at least 2.
    pub fn n_states(&self, k: usize) -> u32 {
        n_states_for(self.m_prime[k], self.n_tanh[k])
    }

    pub fn validate(&self) -> Result<()> {
        if self.m_weight == 0 {
            return Err(Error::Config("m_weight must be >= 1".into()));
        }
        if self.stream_length == 0 {
            return Err(Error::Config("stream_length must be >= 1".into()));
        }
        if self.layer_dims.contains(&0) {
            return Err(Error::Dimension("layer dimensions must be nonzero".into()));
        }
        let hidden = self.hidden_layers();
        if self.m_prime.len() != hidden || self.n_tanh.len() != hidden {
            return Err(Error::Config(format!(
                "{hidden} hidden layers need as many m' and n_tanh entries, got {} and {}",
                self.m_prime.len(),
                self.n_tanh.len()
            )));
        }
        if self.m_prime.contains(&0) {
            return Err(Error::Config("m' must be >= 1".into()));
        }
        if self.n_tanh.iter().any(|&n| !(n.is_finite() && n > 0.0)) {
            return Err(Error::Config("n_tanh must be positive".into()));
        }
        if !(10..=16).contains(&self.lfsr_width) {
            return Err(Error::Config(format!(
                "generator width {} outside 10..=16",
                self.lfsr_width
            )));
        }
        Ok(())
    }

    pub fn check_network(&self, net: &Network) -> Result<()> {
        self.validate()?;
        if self.layer_dims != net.layer_dims() {
            return Err(Error::Dimension(format!(
                "config dims {:?} do not match network dims {:?}",
                self.layer_dims,
                net.layer_dims()
            )));
        }
        Ok(())
    }
}

pub(crate) fn n_states_for(m_prime: u32, n_tanh: f64) -> u32 {
    let raw = (m_prime as f64 * n_tanh / 2.0).ceil() as u32 * 2;
    raw.max(2)
}
