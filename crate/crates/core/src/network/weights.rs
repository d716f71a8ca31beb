//! Fixed-point weights: 10-bit two's complement with 7 fraction bits.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const TOTAL_BITS: u32 = 10;
pub const FRAC_BITS: u32 = 7;
pub const RAW_MIN: i32 = -(1 << (TOTAL_BITS - 1));
pub const RAW_MAX: i32 = (1 << (TOTAL_BITS - 1)) - 1;
/// Largest representable magnitude bound; weights live in `[-4, 4)`.
pub const WEIGHT_BOUND: f64 = 4.0;

/// A quantized weight or bias, stored as its raw two's-complement code.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FixedPointValue(i32);

impl FixedPointValue {
    pub const ZERO: Self = Self(0);
    pub const MAX: Self = Self(RAW_MAX);
    pub const MIN: Self = Self(RAW_MIN);

    pub fn from_raw(raw: i32) -> Result<Self> {
        if (RAW_MIN..=RAW_MAX).contains(&raw) {
            Ok(Self(raw))
        } else {
            Err(Error::ElementRange {
                index: 0,
                value: raw as i64,
                lo: RAW_MIN as i64,
                hi: RAW_MAX as i64,
            })
        }
    }

    /// Round to nearest (ties away from zero), saturating at the code range.
    /// Returns the value and whether it was clamped.
    pub fn quantize(x: f64) -> (Self, bool) {
        if x.is_nan() {
            return (Self::ZERO, true);
        }
        let scaled = (x * (1 << FRAC_BITS) as f64).round();
        if scaled > RAW_MAX as f64 {
            (Self::MAX, true)
        } else if scaled < RAW_MIN as f64 {
            (Self::MIN, true)
        } else {
            (Self(scaled as i32), false)
        }
    }

    pub fn raw(self) -> i32 {
        self.0
    }

    pub fn to_f64(self) -> f64 {
        self.0 as f64 / (1 << FRAC_BITS) as f64
    }
}

/// One affine layer: `w` is `out_dim × in_dim`, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LayerWeights {
    w: Vec<FixedPointValue>,
    b: Vec<FixedPointValue>,
    in_dim: usize,
    out_dim: usize,
}

impl LayerWeights {
    pub fn new(w: Vec<FixedPointValue>, b: Vec<FixedPointValue>, in_dim: usize, out_dim: usize) -> Result<Self> {
        if in_dim == 0 || out_dim == 0 {
            return Err(Error::Dimension("layer dimensions must be nonzero".into()));
        }
        if w.len() != in_dim * out_dim {
            return Err(Error::Dimension(format!(
                "weight matrix has {} entries, expected {out_dim}x{in_dim}",
                w.len()
            )));
        }
        if b.len() != out_dim {
            return Err(Error::Dimension(format!(
                "bias has {} entries, expected {out_dim}",
                b.len()
            )));
        }
        Ok(Self { w, b, in_dim, out_dim })
    }

    pub fn zeros(in_dim: usize, out_dim: usize) -> Result<Self> {
        Self::new(
            vec![FixedPointValue::ZERO; in_dim * out_dim],
            vec![FixedPointValue::ZERO; out_dim],
            in_dim,
            out_dim,
        )
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn weights(&self) -> &[FixedPointValue] {
        &self.w
    }

    pub fn biases(&self) -> &[FixedPointValue] {
        &self.b
    }

    pub fn row(&self, j: usize) -> &[FixedPointValue] {
        &self.w[j * self.in_dim..(j + 1) * self.in_dim]
    }

    pub fn weight(&self, j: usize, i: usize) -> FixedPointValue {
        self.w[j * self.in_dim + i]
    }

    pub fn bias(&self, j: usize) -> FixedPointValue {
        self.b[j]
    }

    /// `W x + b` with decoded weights.
    pub fn affine(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.in_dim {
            return Err(Error::Dimension(format!(
                "layer expects {} inputs, got {}",
                self.in_dim,
                x.len()
            )));
        }
        Ok((0..self.out_dim)
            .map(|j| {
                self.row(j)
                    .iter()
                    .zip(x)
                    .map(|(w, v)| w.to_f64() * v)
                    .sum::<f64>()
                    + self.b[j].to_f64()
            })
            .collect())
    }
}

/// Quantize a real `out_dim × in_dim` matrix (row-major) and bias vector.
/// Values outside the code range are clamped with a warning.
pub fn quantize_weights(w: &[f64], b: &[f64], in_dim: usize, out_dim: usize) -> Result<LayerWeights> {
    let mut clamped = 0usize;
    let mut q = |x: &f64| {
        let (v, c) = FixedPointValue::quantize(*x);
        clamped += c as usize;
        v
    };
    let wq: Vec<_> = w.iter().map(&mut q).collect();
    let bq: Vec<_> = b.iter().map(&mut q).collect();
    if clamped > 0 {
        log::warn!("{clamped} values clamped to the fixed-point weight range");
    }
    LayerWeights::new(wq, bq, in_dim, out_dim)
}

/// A feed-forward stack of layers with matching dimensions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Network {
    layers: Vec<LayerWeights>,
}

impl Network {
    pub fn new(layers: Vec<LayerWeights>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::Empty("a network needs at least one layer"));
        }
        for (k, pair) in layers.windows(2).enumerate() {
            if pair[0].out_dim != pair[1].in_dim {
                return Err(Error::Dimension(format!(
                    "layer {k} emits {} values but layer {} expects {}",
                    pair[0].out_dim,
                    k + 1,
                    pair[1].in_dim
                )));
            }
        }
        Ok(Self { layers })
    }

    pub fn layers(&self) -> &[LayerWeights] {
        &self.layers
    }

    pub fn layer(&self, k: usize) -> &LayerWeights {
        &self.layers[k]
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    /// `[in, hidden..., out]`.
    pub fn layer_dims(&self) -> Vec<usize> {
        let mut dims = vec![self.layers[0].in_dim];
        dims.extend(self.layers.iter().map(|l| l.out_dim));
        dims
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].in_dim
    }

    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].out_dim
    }
}
