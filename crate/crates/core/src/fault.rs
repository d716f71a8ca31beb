//! Bit-deviation injection.
//!
//! Timing violations are modelled as independent bit flips at a fixed rate.
//! The stochastic engine flips neuron output bits of hidden layers and bits
//! of the classification adder words; the fixed-point word engine below
//! flips bits of every accumulator update and every activation word.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::network::fixed::{argmax, sigmoid};
use crate::network::stochastic::StochasticEngine;
use crate::network::weights::{Network, FRAC_BITS};
use crate::network::NetworkConfig;
use crate::seed::derive;

/// Activation words: unsigned, value `code / 256`.
pub const ACT_BITS: u32 = 8;
/// Accumulator words: two's complement with 8 fraction bits.
pub const ACC_BITS: u32 = 16;
pub const ACC_FRAC: u32 = 8;

const FIXED_PATH: u64 = u64::MAX - 1;

/// Where a profile's flips land.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FaultTarget {
    NeuronOutputBits,
    FixedPointWordBits,
}

/// Per-layer deviation rates.
#[derive(Clone, Debug, PartialEq)]
pub struct DeviationProfile {
    rates: Vec<f64>,
    target: FaultTarget,
    seed: u64,
}

impl DeviationProfile {
    pub fn new(rates: Vec<f64>, target: FaultTarget, seed: u64) -> Result<Self> {
        if let Some(&p) = rates.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::Domain {
                value: p,
                domain: "[0, 1]",
            });
        }
        Ok(Self { rates, target, seed })
    }

    /// Rates for a network of `depth` layers from the `(p1, p2, p3)` triple:
    /// the first hidden layer takes `p1`, later hidden layers `p2`, and the
    /// classification layer `p3`.
    pub fn from_triple(p: [f64; 3], depth: usize, target: FaultTarget, seed: u64) -> Result<Self> {
        let rates = (0..depth)
            .map(|k| match k {
                _ if k + 1 == depth => p[2],
                0 => p[0],
                _ => p[1],
            })
            .collect();
        Self::new(rates, target, seed)
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    pub fn target(&self) -> FaultTarget {
        self.target
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

pub fn inject_bit<R: Rng + ?Sized>(bit: bool, p: f64, rng: &mut R) -> bool {
    if p > 0.0 && rng.gen_bool(p) {
        !bit
    } else {
        bit
    }
}

/// Flip each bit of a stream independently with probability `p`.
pub fn flip_bits<R: Rng + ?Sized>(bits: &mut [bool], p: f64, rng: &mut R) {
    if p <= 0.0 {
        return;
    }
    for b in bits {
        *b = inject_bit(*b, p, rng);
    }
}

/// Flip each of the low `bits` bits of an unsigned code with probability `p`.
pub fn flip_code<R: Rng + ?Sized>(code: u64, bits: u32, p: f64, rng: &mut R) -> u64 {
    if p <= 0.0 {
        return code;
    }
    let mut mask = 0u64;
    for k in 0..bits {
        if rng.gen_bool(p) {
            mask |= 1 << k;
        }
    }
    code ^ mask
}

/// Flip bits of a `bits`-wide two's-complement word; the result is
/// sign-extended back to `i64`.
pub fn flip_word<R: Rng + ?Sized>(value: i64, bits: u32, p: f64, rng: &mut R) -> i64 {
    if p <= 0.0 {
        return value;
    }
    let mask = (1u64 << bits) - 1;
    let flipped = flip_code(value as u64 & mask, bits, p, rng);
    let shift = 64 - bits;
    ((flipped << shift) as i64) >> shift
}

fn saturate(v: i64, bits: u32) -> i64 {
    let hi = (1i64 << (bits - 1)) - 1;
    v.clamp(-hi - 1, hi)
}

/// Word-level fixed-point inference with deviations: every accumulator
/// update of layer `k` and every activation word it emits passes through
/// flips at `rates[k]`. Returns the final accumulator words.
pub fn fixed_word_infer<R: Rng + ?Sized>(image: &[u8], net: &Network, rates: &[f64], rng: &mut R) -> Result<Vec<i64>> {
    if image.len() != net.input_dim() {
        return Err(Error::Dimension(format!(
            "image has {} pixels, network expects {}",
            image.len(),
            net.input_dim()
        )));
    }
    if rates.len() != net.depth() {
        return Err(Error::Config(format!(
            "{} deviation rates for {} layers",
            rates.len(),
            net.depth()
        )));
    }
    let shift = FRAC_BITS + ACT_BITS - ACC_FRAC;
    let round = 1i64 << (shift - 1);
    let mut act: Vec<i64> = image.iter().map(|&b| b as i64).collect();
    for (k, layer) in net.layers().iter().enumerate() {
        let p = rates[k];
        let accs: Vec<i64> = (0..layer.out_dim())
            .map(|j| {
                let mut acc = (layer.bias(j).raw() as i64) << (ACC_FRAC - FRAC_BITS);
                for (w, &a) in layer.row(j).iter().zip(&act) {
                    let term = (w.raw() as i64 * a + round) >> shift;
                    acc = flip_word(saturate(acc + term, ACC_BITS), ACC_BITS, p, rng);
                }
                acc
            })
            .collect();
        if k + 1 == net.depth() {
            return Ok(accs);
        }
        let max_code = (1i64 << ACT_BITS) - 1;
        act = accs
            .iter()
            .map(|&acc| {
                let y = sigmoid(acc as f64 / (1 << ACC_FRAC) as f64);
                let code = ((y * (1 << ACT_BITS) as f64).round() as i64).min(max_code);
                flip_code(code as u64, ACT_BITS, p, rng) as i64
            })
            .collect();
    }
    unreachable!("network has at least one layer")
}

/// Error rate of the word engine over a labelled set.
pub fn fixed_word_error_rate(net: &Network, images: &[Vec<u8>], labels: &[u8], rates: &[f64], seed: u64) -> Result<f64> {
    check_dataset(images, labels)?;
    let wrong = images
        .par_iter()
        .zip(labels)
        .enumerate()
        .map(|(k, (img, &label))| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive(seed, &[k as u64, FIXED_PATH]));
            let scores = fixed_word_infer(img, net, rates, &mut rng)?;
            Ok((argmax(&scores) != label as usize) as usize)
        })
        .sum::<Result<usize>>()?;
    Ok(wrong as f64 / images.len() as f64)
}

/// Error rate of the stochastic engine over a labelled set.
pub fn stochastic_error_rate(engine: &StochasticEngine, images: &[Vec<u8>], labels: &[u8], rates: Option<&[f64]>, seed: u64) -> Result<f64> {
    check_dataset(images, labels)?;
    let wrong = engine
        .evaluate(images, seed, rates)?
        .iter()
        .zip(labels)
        .filter(|(r, &l)| r.label != l as usize)
        .count();
    Ok(wrong as f64 / images.len() as f64)
}

fn check_dataset(images: &[Vec<u8>], labels: &[u8]) -> Result<()> {
    if images.is_empty() {
        return Err(Error::Empty("evaluation set is empty"));
    }
    if images.len() != labels.len() {
        return Err(Error::Dimension(format!(
            "{} images but {} labels",
            images.len(),
            labels.len()
        )));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Engine {
    Stochastic,
    Fixed,
}

/// The sweep axes. Fixed-point rows ignore `lengths`.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepGrid {
    pub p1: Vec<f64>,
    pub p2: Vec<f64>,
    pub p3: Vec<f64>,
    pub lengths: Vec<usize>,
    pub seeds: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub engine: Engine,
    pub p1: f64,
    pub p2: f64,
    pub p3: f64,
    /// Zero for fixed-point rows.
    pub stream_length: usize,
    pub seed: u64,
    pub error_rate: f64,
}

/// Error rate over the full grid for both engines: stochastic rows first
/// (`p1`, `p2`, `p3`, length, seed in nested order), then fixed-point rows.
pub fn fault_sweep(net: &Network, cfg: &NetworkConfig, grid: &SweepGrid, images: &[Vec<u8>], labels: &[u8]) -> Result<Vec<SweepRow>> {
    let depth = net.depth();
    let mut rows = Vec::new();
    let triples: Vec<[f64; 3]> = grid
        .p1
        .iter()
        .flat_map(|&a| grid.p2.iter().flat_map(move |&b| grid.p3.iter().map(move |&c| [a, b, c])))
        .collect();
    for p in &triples {
        for &n in &grid.lengths {
            let engine = StochasticEngine::new(net, &cfg.clone().with_stream_length(n))?;
            for &seed in &grid.seeds {
                let profile = DeviationProfile::from_triple(*p, depth, FaultTarget::NeuronOutputBits, seed)?;
                let error_rate = stochastic_error_rate(&engine, images, labels, Some(profile.rates()), seed)?;
                rows.push(SweepRow {
                    engine: Engine::Stochastic,
                    p1: p[0],
                    p2: p[1],
                    p3: p[2],
                    stream_length: n,
                    seed,
                    error_rate,
                });
            }
        }
    }
    for p in &triples {
        for &seed in &grid.seeds {
            let profile = DeviationProfile::from_triple(*p, depth, FaultTarget::FixedPointWordBits, seed)?;
            let error_rate = fixed_word_error_rate(net, images, labels, profile.rates(), seed)?;
            rows.push(SweepRow {
                engine: Engine::Fixed,
                p1: p[0],
                p2: p[1],
                p3: p[2],
                stream_length: 0,
                seed,
                error_rate,
            });
        }
    }
    Ok(rows)
}

pub const SWEEP_HEADER: &str = "p1,p2,p3,stream_length,seed,error_rate";

pub fn write_sweep_csv<'a, W: Write, I: IntoIterator<Item = &'a SweepRow>>(rows: I, mut out: W) -> std::io::Result<()> {
    writeln!(out, "{SWEEP_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            r.p1, r.p2, r.p3, r.stream_length, r.seed, r.error_rate
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::fixed::fixed_point_infer;
    use crate::network::weights::quantize_weights;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn rate_limits() {
        let mut r = rng(1);
        for b in [false, true] {
            assert_eq!(inject_bit(b, 0.0, &mut r), b);
            assert_eq!(inject_bit(b, 1.0, &mut r), !b);
        }
        assert_eq!(flip_code(0b1010, 4, 1.0, &mut r), 0b0101);
        assert_eq!(flip_word(5, 8, 0.0, &mut r), 5);
        // all 8 bits of 0b0000_0101 flipped: 0b1111_1010 = -6
        assert_eq!(flip_word(5, 8, 1.0, &mut r), -6);
    }

    #[test]
    fn flip_count_is_binomial() {
        let mut bits = vec![false; 100_000];
        flip_bits(&mut bits, 0.1, &mut rng(42));
        let flips = bits.iter().filter(|&&b| b).count() as f64;
        assert!((flips - 10_000.0).abs() <= 3.0 * (100_000.0f64 * 0.09).sqrt(), "{flips}");
    }

    #[test]
    fn profile_validation() {
        assert!(DeviationProfile::new(vec![0.1, 1.5], FaultTarget::NeuronOutputBits, 0).is_err());
        let p = DeviationProfile::from_triple([0.09, 0.16, 0.0], 3, FaultTarget::NeuronOutputBits, 0).unwrap();
        assert_eq!(p.rates(), &[0.09, 0.16, 0.0]);
        let p = DeviationProfile::from_triple([0.1, 0.2, 0.3], 4, FaultTarget::FixedPointWordBits, 0).unwrap();
        assert_eq!(p.rates(), &[0.1, 0.2, 0.2, 0.3]);
    }

    fn small_net() -> Network {
        let l0 = quantize_weights(&[1.0, -2.0, 0.5, 3.0, -1.5, 0.25], &[0.5, -0.25], 3, 2).unwrap();
        let l1 = quantize_weights(&[2.0, -1.0, -2.0, 1.5], &[0.0, 0.125], 2, 2).unwrap();
        Network::new(vec![l0, l1]).unwrap()
    }

    #[test]
    fn word_engine_tracks_reference_without_faults() {
        let net = small_net();
        for img in [[0u8, 0, 0], [255, 10, 128], [40, 200, 90]] {
            let words = fixed_word_infer(&img, &net, &[0.0, 0.0], &mut rng(0)).unwrap();
            let reference = fixed_point_infer(&img, &net).unwrap();
            for (w, r) in words.iter().zip(reference) {
                assert!((*w as f64 / 256.0 - r).abs() < 0.05, "{w} vs {r}");
            }
        }
    }

    #[test]
    fn sweep_shape_and_determinism() {
        let net = small_net();
        let cfg = NetworkConfig::for_network(&net, 2, 64).unwrap();
        let images = vec![vec![10, 200, 30], vec![250, 0, 100], vec![128, 128, 128]];
        let labels = vec![0, 1, 0];
        let grid = SweepGrid {
            p1: vec![0.0, 0.1],
            p2: vec![0.0, 0.2],
            p3: vec![0.0],
            lengths: vec![32, 64],
            seeds: vec![1, 2],
        };
        let rows = fault_sweep(&net, &cfg, &grid, &images, &labels).unwrap();
        let stochastic = rows.iter().filter(|r| r.engine == Engine::Stochastic).count();
        assert_eq!(stochastic, 2 * 2 * 2 * 2);
        assert_eq!(rows.len() - stochastic, 2 * 2 * 2);
        assert_eq!(rows, fault_sweep(&net, &cfg, &grid, &images, &labels).unwrap());

        // p = 0 rows equal plain inference
        let engine = StochasticEngine::new(&net, &cfg).unwrap();
        let base = stochastic_error_rate(&engine, &images, &labels, None, 1).unwrap();
        let row = rows
            .iter()
            .find(|r| r.engine == Engine::Stochastic && r.p1 == 0.0 && r.p2 == 0.0 && r.stream_length == 64 && r.seed == 1)
            .unwrap();
        assert_eq!(row.error_rate, base);

        let mut buf = Vec::new();
        write_sweep_csv(&rows[..1], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("p1,p2,p3,stream_length,seed,error_rate\n0,0,0,32,1,"));
    }

    #[test]
    fn dataset_checks() {
        let net = small_net();
        assert!(fixed_word_error_rate(&net, &[], &[], &[0.0, 0.0], 0).is_err());
        assert!(fixed_word_error_rate(&net, &[vec![1, 2, 3]], &[], &[0.0, 0.0], 0).is_err());
        assert!(fixed_word_infer(&[1, 2, 3], &net, &[0.0], &mut rng(0)).is_err());
    }
}
