//! The `isc-weights-v1` interchange file.
//!
//! A JSON document:
//!
//! ```json
//! {
//!   "format": "isc-weights-v1",
//!   "layer_dims": [16, 8, 4],
//!   "frac_bits": 7,
//!   "total_bits": 10,
//!   "layers": [ { "w": [/* out*in raw codes, row-major */], "b": [/* out */] } ]
//! }
//! ```

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::weights::{FixedPointValue, LayerWeights, Network, FRAC_BITS, RAW_MAX, RAW_MIN, TOTAL_BITS};
use crate::error::{Error, Result};

pub const FORMAT_TAG: &str = "isc-weights-v1";

#[derive(Clone, Debug, Serialize, Deserialize)]
struct LayerRecord {
    w: Vec<i64>,
    b: Vec<i64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct WeightsDocument {
    format: String,
    layer_dims: Vec<usize>,
    frac_bits: u32,
    total_bits: u32,
    layers: Vec<LayerRecord>,
}

fn to_value(raw: i64, layer: usize, what: &str, index: usize) -> Result<FixedPointValue> {
    if raw < RAW_MIN as i64 || raw > RAW_MAX as i64 {
        return Err(Error::Parse(format!(
            "layer {layer} {what}[{index}] = {raw} outside [{RAW_MIN}, {RAW_MAX}]"
        )));
    }
    FixedPointValue::from_raw(raw as i32)
}

/// Parse and fully validate a weights document.
pub fn parse_weights(text: &str) -> Result<Network> {
    let doc: WeightsDocument =
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("weights file: {e}")))?;
    if doc.format != FORMAT_TAG {
        return Err(Error::Parse(format!(
            "unsupported format '{}', expected '{FORMAT_TAG}'",
            doc.format
        )));
    }
    if doc.frac_bits != FRAC_BITS || doc.total_bits != TOTAL_BITS {
        return Err(Error::Parse(format!(
            "fixed-point layout {}/{} not supported, expected {FRAC_BITS}/{TOTAL_BITS}",
            doc.frac_bits, doc.total_bits
        )));
    }
    if doc.layer_dims.len() < 2 || doc.layers.len() + 1 != doc.layer_dims.len() {
        return Err(Error::Dimension(format!(
            "{} layer records do not fit layer_dims {:?}",
            doc.layers.len(),
            doc.layer_dims
        )));
    }
    let mut layers = Vec::with_capacity(doc.layers.len());
    for (k, rec) in doc.layers.iter().enumerate() {
        let (in_dim, out_dim) = (doc.layer_dims[k], doc.layer_dims[k + 1]);
        if rec.w.len() != in_dim * out_dim || rec.b.len() != out_dim {
            return Err(Error::Dimension(format!(
                "layer {k}: {} weights and {} biases do not match {out_dim}x{in_dim}",
                rec.w.len(),
                rec.b.len()
            )));
        }
        let w = rec
            .w
            .iter()
            .enumerate()
            .map(|(i, &r)| to_value(r, k, "w", i))
            .collect::<Result<Vec<_>>>()?;
        let b = rec
            .b
            .iter()
            .enumerate()
            .map(|(i, &r)| to_value(r, k, "b", i))
            .collect::<Result<Vec<_>>>()?;
        layers.push(LayerWeights::new(w, b, in_dim, out_dim)?);
    }
    Network::new(layers)
}

pub fn render_weights(net: &Network) -> String {
    let doc = WeightsDocument {
        format: FORMAT_TAG.to_string(),
        layer_dims: net.layer_dims(),
        frac_bits: FRAC_BITS,
        total_bits: TOTAL_BITS,
        layers: net
            .layers()
            .iter()
            .map(|l| LayerRecord {
                w: l.weights().iter().map(|v| v.raw() as i64).collect(),
                b: l.biases().iter().map(|v| v.raw() as i64).collect(),
            })
            .collect(),
    };
    serde_json::to_string(&doc).expect("weights document serializes")
}

pub fn load_weights(path: &Path) -> Result<Network> {
    parse_weights(&fs::read_to_string(path)?)
}

pub fn save_weights(net: &Network, path: &Path) -> Result<()> {
    fs::write(path, render_weights(net) + "\n")?;
    Ok(())
}
