//! Adder-range calibration.
//!
//! `m'` is the half-width of the smallest symmetric window holding the
//! requested share of per-cycle adder outputs. The tanh state count is then
//! matched to the measured spread of the clamped adder output: a saturating
//! counter with `S` states driven by steps of mean `mu` and long-run
//! variance `v` sits in its upper half with probability close to
//! `sigmoid(mu·S/v)`. With `mu = m·z/4` that equals `sigmoid(z)` when
//! `S = 4v/m`, so `n_tanh = 4v / (m·m')`.

use std::collections::BTreeMap;

use super::stochastic::{image_seed, StochasticEngine};
use super::weights::Network;
use super::NetworkConfig;
use crate::error::{Error, Result};

pub const DEFAULT_COVERAGE: f64 = 0.95;
pub const MIN_SAMPLES: usize = 100;

/// Counts of integer adder outputs.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AdderHistogram {
    counts: BTreeMap<i32, u64>,
    total: u64,
}

impl AdderHistogram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, v: i32) {
        *self.counts.entry(v).or_insert(0) += 1;
        self.total += 1;
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn counts(&self) -> &BTreeMap<i32, u64> {
        &self.counts
    }

    /// Mass inside `[-m, m]`.
    pub fn mass_within(&self, m: u32) -> u64 {
        let m = m as i32;
        self.counts.range(-m..=m).map(|(_, &c)| c).sum()
    }

    /// Largest absolute value seen.
    pub fn max_abs(&self) -> u32 {
        self.counts.keys().map(|v| v.unsigned_abs()).max().unwrap_or(0)
    }
}

impl Extend<i32> for AdderHistogram {
    fn extend<I: IntoIterator<Item = i32>>(&mut self, iter: I) {
        for v in iter {
            self.add(v);
        }
    }
}

impl FromIterator<i32> for AdderHistogram {
    fn from_iter<I: IntoIterator<Item = i32>>(iter: I) -> Self {
        let mut h = Self::new();
        h.extend(iter);
        h
    }
}

/// Smallest `m'` whose window `[-m', m']` holds at least `coverage` of the
/// mass, never below 1. The comparison is done in parts per million to
/// stay exact for round coverages.
pub fn m_prime_for_coverage(hist: &AdderHistogram, coverage: f64) -> Result<u32> {
    if hist.total() == 0 {
        return Err(Error::Empty("adder histogram is empty"));
    }
    if !(coverage > 0.0 && coverage <= 1.0) {
        return Err(Error::Domain {
            value: coverage,
            domain: "(0, 1]",
        });
    }
    let ppm = (coverage * 1e6).round() as u128;
    let need = |m: u32| hist.mass_within(m) as u128 * 1_000_000 >= ppm * hist.total() as u128;
    let m = (0..=hist.max_abs()).find(|&m| need(m)).unwrap_or(hist.max_abs());
    Ok(m.max(1))
}

/// Calibration result for one hidden layer.
#[derive(Clone, Debug, PartialEq)]
pub struct LayerCalibration {
    pub layer: usize,
    pub m_prime: u32,
    pub n_tanh: f64,
    /// Long-run per-cycle variance of the clamped adder output.
    pub step_variance: f64,
    pub histogram: AdderHistogram,
}

/// Long-run variance of one series by batch means over 8 blocks.
fn batch_means_variance(series: &[i32]) -> Option<f64> {
    let block = series.len() / 8;
    if block == 0 {
        return None;
    }
    let sums: Vec<f64> = series
        .chunks_exact(block)
        .map(|c| c.iter().map(|&v| v as f64).sum())
        .collect();
    let k = sums.len() as f64;
    let mean = sums.iter().sum::<f64>() / k;
    let ss: f64 = sums.iter().map(|s| (s - mean).powi(2)).sum();
    Some(ss / ((k - 1.0) * block as f64))
}

/// Calibrate hidden layer `layer` of the engine's network on `samples`;
/// image `k` uses the seed `image_seed(seed, k)`. Layers before `layer`
/// run with the engine's current configuration.
pub fn calibrate_range(engine: &StochasticEngine, layer: usize, samples: &[Vec<u8>], seed: u64) -> Result<LayerCalibration> {
    if samples.is_empty() {
        return Err(Error::Empty("calibration needs at least one sample"));
    }
    if samples.len() < MIN_SAMPLES {
        log::warn!("calibrating on {} samples, fewer than {MIN_SAMPLES}", samples.len());
    }
    if layer >= engine.config().hidden_layers() {
        return Err(Error::Config(format!("layer {layer} is not a hidden layer")));
    }
    let sums = samples
        .iter()
        .enumerate()
        .map(|(k, img)| engine.adder_outputs(img, image_seed(seed, k), layer))
        .collect::<Result<Vec<_>>>()?;
    let histogram: AdderHistogram = sums.iter().flatten().flatten().copied().collect();
    let m_prime = m_prime_for_coverage(&histogram, DEFAULT_COVERAGE)?;
    let lim = m_prime as i32;
    let vars: Vec<f64> = sums
        .iter()
        .flatten()
        .filter_map(|s| {
            let clamped: Vec<i32> = s.iter().map(|&v| v.clamp(-lim, lim)).collect();
            batch_means_variance(&clamped)
        })
        .collect();
    let m = engine.config().m_weight as f64;
    let step_variance = if vars.is_empty() {
        m_prime as f64
    } else {
        vars.iter().sum::<f64>() / vars.len() as f64
    };
    let n_tanh = (4.0 * step_variance / (m * m_prime as f64)).max(1.0 / m_prime as f64);
    Ok(LayerCalibration {
        layer,
        m_prime,
        n_tanh,
        step_variance,
        histogram,
    })
}

/// Calibrate every hidden layer in order, each on top of the calibrated
/// layers before it.
pub fn calibrate_network(net: &Network, cfg: &NetworkConfig, samples: &[Vec<u8>], seed: u64) -> Result<(NetworkConfig, Vec<LayerCalibration>)> {
    let mut cfg = cfg.clone();
    let mut out = Vec::with_capacity(cfg.hidden_layers());
    for layer in 0..cfg.hidden_layers() {
        let engine = StochasticEngine::new(net, &cfg)?;
        let cal = calibrate_range(&engine, layer, samples, seed)?;
        cfg.m_prime[layer] = cal.m_prime;
        cfg.n_tanh[layer] = cal.n_tanh;
        out.push(cal);
    }
    Ok((cfg, out))
}
