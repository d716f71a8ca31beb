//! Stochastic inference: the composed single-neuron path built from stream
//! operations, and a fused engine that evaluates whole layers with shared
//! generator sets.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::fixed::argmax;
use super::weights::{FixedPointValue, Network, RAW_MIN, TOTAL_BITS};
use super::{n_states_for, NetworkConfig};
use crate::error::{Error, Result};
use crate::fault::{flip_bits, flip_word};
use crate::fsm::{run, sigmoid_stream, FsmConfig};
use crate::lfsr::{AnySource, SourceKind, UniformSource};
use crate::ops::{int_mul_binary, tree_add};
use crate::seed::{derive, sources};
use crate::stream::{b2is, BinaryStream, Format, IntegerStream, Scaling};

/// Input bits and weight-generator draws of one layer.
type Draws = (Vec<Vec<bool>>, Vec<Vec<u32>>);

/// Weights enter the stream domain divided by this factor so that
/// `[-4, 4]` maps onto the bipolar range `[-1, 1]`.
pub const WEIGHT_SCALE: f64 = 4.0;

const FAULT_PATH: u64 = u64::MAX;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InferenceResult {
    pub label: usize,
    pub class_counts: Vec<i64>,
    pub cycles: usize,
}

impl InferenceResult {
    fn from_counts(class_counts: Vec<i64>, cycles: usize) -> Self {
        Self {
            label: argmax(&class_counts),
            class_counts,
            cycles,
        }
    }
}

/// Bipolar integer stream of `w / 4` with implicit scale `1/m`, one source
/// per sub-stream.
pub fn weight_stream<S: UniformSource>(w: FixedPointValue, len: usize, sources: &mut [S]) -> Result<IntegerStream> {
    b2is(w.to_f64() / WEIGHT_SCALE, len, sources, Scaling::Implicit, Format::Bipolar)
}

/// Comparator threshold of a weight sub-stream: `(raw + 512) / 1024` on a
/// `width`-bit grid. Exact for `width >= 10`.
pub fn weight_threshold(w: FixedPointValue, width: u32) -> u32 {
    ((w.raw() - RAW_MIN) as u32) << (width - TOTAL_BITS)
}

/// Comparator threshold of a pixel: `byte / 256` on a `width`-bit grid.
pub fn pixel_threshold(byte: u8, width: u32) -> u32 {
    (byte as u32) << (width - 8)
}

/// The adder stage: `int_mul_binary` per input, then one tree adder over
/// the products and the bias stream.
pub fn neuron_adder(
    inputs: &[BinaryStream],
    weight_streams: &[IntegerStream],
    bias_stream: &IntegerStream,
) -> Result<IntegerStream> {
    if inputs.len() != weight_streams.len() {
        return Err(Error::Dimension(format!(
            "{} input streams but {} weight streams",
            inputs.len(),
            weight_streams.len()
        )));
    }
    let mut terms = inputs
        .iter()
        .zip(weight_streams)
        .map(|(x, w)| int_mul_binary(w, x))
        .collect::<Result<Vec<_>>>()?;
    terms.push(bias_stream.clone());
    tree_add(&terms)
}

/// Saturate every element into `[-m', m']`; the result has range `m'`.
pub fn clamp_stream(s: &IntegerStream, m_prime: u32) -> Result<IntegerStream> {
    if s.format() != Format::Bipolar {
        return Err(Error::FormatMismatch("only bipolar adder outputs are clamped".into()));
    }
    let lim = m_prime as i32;
    let elements = s.elements().iter().map(|&v| v.clamp(-lim, lim)).collect();
    IntegerStream::new(elements, m_prime, Format::Bipolar, s.implicit_scale())
}

/// One hidden neuron: adder, clamp to `[-m', m']`, then the sigmoid FSM
/// with `even_ceil(m'·n_tanh)` states. Output is a unipolar stream.
pub fn stochastic_neuron(
    inputs: &[BinaryStream],
    weight_streams: &[IntegerStream],
    bias_stream: &IntegerStream,
    m_prime: u32,
    n_tanh: f64,
) -> Result<BinaryStream> {
    if m_prime == 0 {
        return Err(Error::Config("m' must be >= 1".into()));
    }
    let sum = neuron_adder(inputs, weight_streams, bias_stream)?;
    let clamped = clamp_stream(&sum, m_prime)?;
    let fsm = FsmConfig::tanh(n_states_for(m_prime, n_tanh))?;
    sigmoid_stream(&clamped, &fsm)
}

/// Full record of one inference: every hidden layer's output bits.
#[derive(Clone, Debug)]
pub struct Trace {
    pub hidden: Vec<Vec<Vec<bool>>>,
    pub result: InferenceResult,
}

/// Seed of image `index` within a run.
pub fn image_seed(run_seed: u64, index: usize) -> u64 {
    derive(run_seed, &[index as u64])
}

/// Layer-at-a-time evaluator. Every layer draws one generator set per
/// image: pixel generators (first layer only) followed by `m` sub-stream
/// generators for each of the `in_dim + 1` weight positions. All neurons
/// of the layer compare their own thresholds against the same draws.
pub struct StochasticEngine<'a> {
    net: &'a Network,
    cfg: NetworkConfig,
    width: u32,
    fsms: Vec<FsmConfig>,
    thresholds: Vec<Vec<u32>>,
    output_word_bits: u32,
}

impl<'a> StochasticEngine<'a> {
    pub fn new(net: &'a Network, cfg: &NetworkConfig) -> Result<Self> {
        cfg.check_network(net)?;
        let m = cfg.m_weight as usize;
        let generators = net
            .layers()
            .iter()
            .enumerate()
            .map(|(k, l)| (l.in_dim() + 1) * m + if k == 0 { l.in_dim() } else { 0 })
            .max()
            .unwrap_or(0);
        let width = match cfg.source {
            SourceKind::Iid => cfg.lfsr_width,
            SourceKind::Lfsr => {
                let mut w = cfg.lfsr_width;
                while ((1u64 << w) - 1) < 2 * generators as u64 {
                    w += 1;
                }
                if w > 16 {
                    return Err(Error::Config(format!(
                        "{generators} generators per layer exceed the 16-bit LFSR orbit"
                    )));
                }
                if w != cfg.lfsr_width {
                    log::info!("generator width raised from {} to {w} for {generators} generators", cfg.lfsr_width);
                }
                w
            }
        };
        let fsms = (0..cfg.hidden_layers())
            .map(|k| FsmConfig::tanh(cfg.n_states(k)))
            .collect::<Result<Vec<_>>>()?;
        let thresholds = net
            .layers()
            .iter()
            .map(|l| {
                (0..l.out_dim())
                    .flat_map(|j| {
                        l.row(j)
                            .iter()
                            .chain(std::iter::once(&l.biases()[j]))
                            .map(|&w| weight_threshold(w, width))
                            .collect::<Vec<_>>()
                    })
                    .collect()
            })
            .collect();
        let last = net.layer(net.depth() - 1);
        let span = 2 * (last.in_dim() as u64 + 1) * cfg.m_weight as u64 + 1;
        let output_word_bits = 64 - (span - 1).leading_zeros();
        Ok(Self {
            net,
            cfg: cfg.clone(),
            width,
            fsms,
            thresholds,
            output_word_bits,
        })
    }

    pub fn config(&self) -> &NetworkConfig {
        &self.cfg
    }

    /// Comparator width actually used.
    pub fn width(&self) -> u32 {
        self.width
    }

    /// Two's-complement width of a classification-layer adder output.
    pub fn output_word_bits(&self) -> u32 {
        self.output_word_bits
    }

    pub fn generator_count(&self, layer: usize) -> usize {
        let l = self.net.layer(layer);
        let pixels = if layer == 0 { l.in_dim() } else { 0 };
        pixels + (l.in_dim() + 1) * self.cfg.m_weight as usize
    }

    /// The generator set of `layer` for one image, in allocation order.
    pub fn layer_sources(&self, image_seed: u64, layer: usize) -> Result<Vec<AnySource>> {
        sources(
            self.cfg.source,
            self.width,
            self.generator_count(layer),
            derive(image_seed, &[layer as u64]),
        )
    }

    fn check_image(&self, image: &[u8]) -> Result<()> {
        if image.len() != self.net.input_dim() {
            return Err(Error::Dimension(format!(
                "image has {} pixels, network expects {}",
                image.len(),
                self.net.input_dim()
            )));
        }
        Ok(())
    }

    /// Draw the layer's generators: input bits for the first layer (empty
    /// otherwise) and `(in_dim + 1)·m` rows of weight draws.
    fn draw(&self, image: &[u8], image_seed: u64, layer: usize) -> Result<Draws> {
        let n = self.cfg.stream_length;
        let mut srcs = self.layer_sources(image_seed, layer)?;
        let mut pixels = Vec::new();
        let skip = if layer == 0 {
            for (src, &byte) in srcs.iter_mut().zip(image) {
                let thr = pixel_threshold(byte, self.width);
                pixels.push((0..n).map(|_| src.next_value() < thr).collect());
            }
            image.len()
        } else {
            0
        };
        let draws = srcs[skip..]
            .iter_mut()
            .map(|src| (0..n).map(|_| src.next_value()).collect())
            .collect();
        Ok((pixels, draws))
    }

    fn neuron_sum(&self, layer: usize, j: usize, inputs: &[Vec<bool>], draws: &[Vec<u32>], count: &mut [i32]) -> Vec<i32> {
        let n = self.cfg.stream_length;
        let m = self.cfg.m_weight as usize;
        let in_dim = inputs.len();
        let thr = &self.thresholds[layer][j * (in_dim + 1)..(j + 1) * (in_dim + 1)];
        let mut out = vec![0i32; n];
        for (i, &t_i) in thr.iter().enumerate() {
            count.fill(-(m as i32));
            for row in &draws[i * m..(i + 1) * m] {
                for (c, &v) in count.iter_mut().zip(row) {
                    *c += 2 * (v < t_i) as i32;
                }
            }
            match inputs.get(i) {
                Some(x) => {
                    for ((o, &c), &bit) in out.iter_mut().zip(count.iter()).zip(x) {
                        *o += c & -(bit as i32);
                    }
                }
                None => {
                    for (o, &c) in out.iter_mut().zip(count.iter()) {
                        *o += c;
                    }
                }
            }
        }
        out
    }

    fn layer_sums(&self, layer: usize, inputs: &[Vec<bool>], draws: &[Vec<u32>]) -> Vec<Vec<i32>> {
        let mut count = vec![0i32; self.cfg.stream_length];
        (0..self.net.layer(layer).out_dim())
            .map(|j| self.neuron_sum(layer, j, inputs, draws, &mut count))
            .collect()
    }

    fn hidden_outputs(&self, layer: usize, sums: Vec<Vec<i32>>, fault: Option<(f64, &mut ChaCha8Rng)>) -> Vec<Vec<bool>> {
        let lim = self.cfg.m_prime[layer] as i32;
        let fsm = &self.fsms[layer];
        let mut outs: Vec<Vec<bool>> = sums
            .into_iter()
            .map(|s| run(fsm, s.into_iter().map(|v| v.clamp(-lim, lim))))
            .collect();
        if let Some((p, rng)) = fault {
            for bits in &mut outs {
                flip_bits(bits, p, rng);
            }
        }
        outs
    }

    /// Run the whole network, optionally flipping bits at per-layer rates:
    /// hidden layers flip output bits, the classification layer flips bits
    /// of its per-cycle adder output words.
    pub fn trace(&self, image: &[u8], image_seed: u64, rates: Option<&[f64]>) -> Result<Trace> {
        self.check_image(image)?;
        if let Some(r) = rates {
            if r.len() != self.net.depth() {
                return Err(Error::Config(format!(
                    "{} deviation rates for {} layers",
                    r.len(),
                    self.net.depth()
                )));
            }
        }
        let mut fault_rng = ChaCha8Rng::seed_from_u64(derive(image_seed, &[FAULT_PATH]));
        let active = |k: usize| rates.map(|r| r[k]).filter(|&p| p > 0.0);
        let mut hidden = Vec::with_capacity(self.cfg.hidden_layers());
        let mut inputs: Vec<Vec<bool>> = Vec::new();
        for k in 0..self.net.depth() {
            let (pixels, draws) = self.draw(image, image_seed, k)?;
            if k == 0 {
                inputs = pixels;
            }
            let mut sums = self.layer_sums(k, &inputs, &draws);
            if k + 1 < self.net.depth() {
                let fault = active(k).map(|p| (p, &mut fault_rng));
                inputs = self.hidden_outputs(k, sums, fault);
                hidden.push(inputs.clone());
            } else {
                if let Some(p) = active(k) {
                    for s in &mut sums {
                        for v in s.iter_mut() {
                            *v = flip_word(*v as i64, self.output_word_bits, p, &mut fault_rng) as i32;
                        }
                    }
                }
                let counts = sums.iter().map(|s| s.iter().map(|&v| v as i64).sum()).collect();
                return Ok(Trace {
                    hidden,
                    result: InferenceResult::from_counts(counts, self.cfg.stream_length),
                });
            }
        }
        unreachable!("network has at least one layer")
    }

    pub fn infer(&self, image: &[u8], image_seed: u64) -> Result<InferenceResult> {
        Ok(self.trace(image, image_seed, None)?.result)
    }

    pub fn infer_with_faults(&self, image: &[u8], image_seed: u64, rates: &[f64]) -> Result<InferenceResult> {
        Ok(self.trace(image, image_seed, Some(rates))?.result)
    }

    /// Unclamped adder outputs of every neuron in `layer`, with earlier
    /// layers evaluated normally.
    pub fn adder_outputs(&self, image: &[u8], image_seed: u64, layer: usize) -> Result<Vec<Vec<i32>>> {
        self.check_image(image)?;
        if layer >= self.net.depth() {
            return Err(Error::Config(format!("no layer {layer}")));
        }
        let mut inputs = Vec::new();
        for k in 0..=layer {
            let (pixels, draws) = self.draw(image, image_seed, k)?;
            if k == 0 {
                inputs = pixels;
            }
            let sums = self.layer_sums(k, &inputs, &draws);
            if k == layer {
                return Ok(sums);
            }
            inputs = self.hidden_outputs(k, sums, None);
        }
        unreachable!()
    }

    /// Infer a batch in parallel; image `k` uses [`image_seed`]`(run_seed, k)`.
    pub fn evaluate(&self, images: &[Vec<u8>], run_seed: u64, rates: Option<&[f64]>) -> Result<Vec<InferenceResult>> {
        images
            .par_iter()
            .enumerate()
            .map(|(k, img)| Ok(self.trace(img, image_seed(run_seed, k), rates)?.result))
            .collect()
    }
}

/// Single-image inference with a fresh engine.
pub fn stochastic_infer(image: &[u8], net: &Network, cfg: &NetworkConfig, master_seed: u64) -> Result<InferenceResult> {
    StochasticEngine::new(net, cfg)?.infer(image, master_seed)
}
