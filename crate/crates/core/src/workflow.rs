//! Glue between the dataset, preprocessing and network modules.

use crate::dataset::DatasetManifest;
use crate::error::Result;
use crate::nn::{predict, Checkpoint, Sample};
use crate::preprocess::{load_image, preprocess_pipeline, PreprocessConfig};

/// Decodes and preprocesses every record of `manifest`, in manifest order.
pub fn load_samples(manifest: &DatasetManifest, config: &PreprocessConfig) -> Result<Vec<Sample>> {
    manifest
        .records()
        .iter()
        .map(|r| {
            let image = load_image(&r.path)?;
            Ok(Sample {
                input: preprocess_pipeline(&image, config)?.into_tensor(),
                label: r.label,
            })
        })
        .collect()
}

/// Predicted class for each sample, in order.
pub fn predict_all(checkpoint: &Checkpoint, samples: &[Sample]) -> Result<Vec<usize>> {
    samples
        .iter()
        .map(|s| predict(checkpoint, &s.input).map(|(class, _)| class))
        .collect()
}
