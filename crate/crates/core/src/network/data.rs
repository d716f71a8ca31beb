//! Synthetic datasets for self-contained experiments.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::fixed::pixel_value;
use crate::seed::derive;

/// Images as pixel bytes with class labels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dataset {
    pub images: Vec<Vec<u8>>,
    pub labels: Vec<u8>,
    pub classes: usize,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn input_dim(&self) -> usize {
        self.images.first().map_or(0, Vec::len)
    }

    /// Inputs scaled to `[0, 1)` for training.
    pub fn scaled_inputs(&self) -> Vec<Vec<f64>> {
        self.images
            .iter()
            .map(|img| img.iter().map(|&p| pixel_value(p)).collect())
            .collect()
    }

    pub fn label_indices(&self) -> Vec<usize> {
        self.labels.iter().map(|&l| l as usize).collect()
    }

    pub fn take(&self, n: usize) -> Dataset {
        Dataset {
            images: self.images.iter().take(n).cloned().collect(),
            labels: self.labels.iter().take(n).copied().collect(),
            classes: self.classes,
        }
    }
}

pub const TOY_SIDE: usize = 4;
pub const TOY_DIM: usize = TOY_SIDE * TOY_SIDE;
pub const TOY_CLASSES: usize = 4;
const DARK: f64 = 40.0;
const BRIGHT: f64 = 215.0;
pub const TOY_NOISE: f64 = 110.0;

/// Class prototypes of the toy task: 4×4 patterns of dark and bright
/// pixels, one row, column, diagonal band and centre block each.
pub fn toy_prototypes() -> [[f64; TOY_DIM]; TOY_CLASSES] {
    let mut protos = [[DARK; TOY_DIM]; TOY_CLASSES];
    for r in 0..TOY_SIDE {
        for c in 0..TOY_SIDE {
            let k = r * TOY_SIDE + c;
            if r == 1 || r == 2 && c < 2 {
                protos[0][k] = BRIGHT;
            }
            if c == 2 || c == 1 && r > 1 {
                protos[1][k] = BRIGHT;
            }
            if r == c || r + 1 == c {
                protos[2][k] = BRIGHT;
            }
            if (1..3).contains(&r) && (1..3).contains(&c) || r + c == 3 {
                protos[3][k] = BRIGHT;
            }
        }
    }
    protos
}

/// `count` noisy samples of the toy task with balanced, shuffled labels.
pub fn toy_dataset(count: usize, seed: u64) -> Dataset {
    toy_dataset_with_noise(count, TOY_NOISE, seed)
}

/// As [`toy_dataset`] with Gaussian pixel noise of deviation `sigma`.
pub fn toy_dataset_with_noise(count: usize, sigma: f64, seed: u64) -> Dataset {
    let protos = toy_prototypes();
    let mut rng = ChaCha8Rng::seed_from_u64(derive(seed, &[0x70]));
    let noise = Normal::new(0.0, sigma.max(0.0)).expect("finite deviation");
    let mut images = Vec::with_capacity(count);
    let mut labels = Vec::with_capacity(count);
    for k in 0..count {
        let class = if k < count / TOY_CLASSES * TOY_CLASSES {
            k % TOY_CLASSES
        } else {
            rng.gen_range(0..TOY_CLASSES)
        };
        let img = protos[class]
            .iter()
            .map(|&p| (p + noise.sample(&mut rng)).round().clamp(0.0, 255.0) as u8)
            .collect();
        images.push(img);
        labels.push(class as u8);
    }
    // Fisher-Yates on paired indices
    for i in (1..count).rev() {
        let j = rng.gen_range(0..=i);
        images.swap(i, j);
        labels.swap(i, j);
    }
    Dataset {
        images,
        labels,
        classes: TOY_CLASSES,
    }
}

/// The four XOR points with labels.
pub fn xor_dataset() -> (Vec<Vec<f64>>, Vec<usize>) {
    (
        vec![vec![0.0, 0.0], vec![0.0, 1.0], vec![1.0, 0.0], vec![1.0, 1.0]],
        vec![0, 1, 1, 0],
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prototypes_are_distinct() {
        let p = toy_prototypes();
        for a in 0..TOY_CLASSES {
            for b in a + 1..TOY_CLASSES {
                let diff = p[a].iter().zip(&p[b]).filter(|(x, y)| x != y).count();
                assert!(diff >= 4, "classes {a} and {b} differ in {diff} pixels");
            }
        }
    }

    #[test]
    fn deterministic_and_balanced() {
        let a = toy_dataset(400, 5);
        assert_eq!(a, toy_dataset(400, 5));
        assert_ne!(a, toy_dataset(400, 6));
        assert_eq!(a.input_dim(), TOY_DIM);
        for c in 0..TOY_CLASSES as u8 {
            assert_eq!(a.labels.iter().filter(|&&l| l == c).count(), 100);
        }
        assert_eq!(a.take(10).len(), 10);
    }
}
