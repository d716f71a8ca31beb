//! Floating-point evaluation of the quantized network; the reference that
//! the stochastic engine is compared against.

use super::weights::Network;
use crate::error::{Error, Result};

pub fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Pixel byte to `[0, 1)`: `byte / 256`.
pub fn pixel_value(byte: u8) -> f64 {
    byte as f64 / 256.0
}

/// Index of the largest value; ties resolve to the lowest index.
pub fn argmax<T: PartialOrd + Copy>(values: &[T]) -> usize {
    let mut best = 0;
    for (k, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = k;
        }
    }
    best
}

/// Pre-activations of every layer: sigmoid between layers, none after the
/// last. `inputs` are already scaled to `[0, 1]`.
pub fn forward(net: &Network, inputs: &[f64]) -> Result<Vec<Vec<f64>>> {
    let mut zs = Vec::with_capacity(net.depth());
    let mut act = inputs.to_vec();
    for (k, layer) in net.layers().iter().enumerate() {
        let z = layer.affine(&act)?;
        if k + 1 < net.depth() {
            act = z.iter().map(|&v| sigmoid(v)).collect();
        }
        zs.push(z);
    }
    Ok(zs)
}

/// Raw output scores for one image of pixel bytes.
pub fn fixed_point_infer(image: &[u8], net: &Network) -> Result<Vec<f64>> {
    if image.len() != net.input_dim() {
        return Err(Error::Dimension(format!(
            "image has {} pixels, network expects {}",
            image.len(),
            net.input_dim()
        )));
    }
    let x: Vec<f64> = image.iter().map(|&p| pixel_value(p)).collect();
    Ok(forward(net, &x)?.pop().expect("at least one layer"))
}

pub fn fixed_point_label(image: &[u8], net: &Network) -> Result<usize> {
    Ok(argmax(&fixed_point_infer(image, net)?))
}
