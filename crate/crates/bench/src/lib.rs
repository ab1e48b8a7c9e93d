//! Deterministic inputs shared by the benchmarks.

use leafclass::dataset::synthesize_image;
use leafclass::nn::Sample;
use leafclass::preprocess::{preprocess_pipeline, PreprocessConfig};
use leafclass::{ConfusionMatrix, RawImage, SyntheticSpec, Tensor};

/// Pseudo-random but fixed values in [-1, 1).
pub fn values(n: usize, salt: u64) -> Vec<f64> {
    let mut state = salt.wrapping_mul(0x9E37_79B9_7F4A_7C15) | 1;
    (0..n)
        .map(|_| {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 52) as f64 - 1.0
        })
        .collect()
}

pub fn tensor(h: usize, w: usize, c: usize) -> Tensor {
    Tensor::from_vec(vec![h, w, c], values(h * w * c, 1)).expect("non-empty shape")
}

pub fn image(side: usize) -> RawImage {
    let spec = SyntheticSpec {
        height: side,
        width: side,
        ..Default::default()
    };
    synthesize_image(&spec, 2, 0)
}

pub fn samples(n: usize, side: usize, classes: usize) -> Vec<Sample> {
    let spec = SyntheticSpec {
        num_classes: classes,
        height: side,
        width: side,
        ..Default::default()
    };
    let cfg = PreprocessConfig {
        target_height: side,
        target_width: side,
        ..Default::default()
    };
    (0..n)
        .map(|i| Sample {
            input: preprocess_pipeline(&synthesize_image(&spec, i % classes, i), &cfg)
                .expect("valid synthetic image")
                .into_tensor(),
            label: i % classes,
        })
        .collect()
}

/// A k-class matrix with a heavy diagonal and scattered errors.
pub fn confusion(k: usize) -> ConfusionMatrix {
    let rows = (0..k)
        .map(|t| {
            (0..k)
                .map(|p| {
                    if t == p {
                        150
                    } else {
                        ((t * 7 + p * 3) % 5) as u64
                    }
                })
                .collect()
        })
        .collect();
    ConfusionMatrix::from_rows(rows).expect("square matrix")
}
