//! Dataset ingestion: directory-per-class scanning, manifest files, the
//! per-class train/test split, label encoding and a synthetic corpus
//! generator.

mod manifest;
mod scan;
mod split;
mod synthetic;

pub use self::manifest::{
    read_manifest_csv, write_manifest_csv, ClassLabel, DatasetManifest, LabeledImage,
};
pub use self::scan::{scan_dataset, scan_dataset_with_warnings, ScanWarning};
pub use self::split::{stratified_split, train_count, SplitSpec};
pub use self::synthetic::{generate_synthetic_corpus, synthesize_image, SyntheticSpec};

use crate::error::{Error, Result};

/// One-hot encoding of a class index over `k` classes.
pub fn encode_one_hot(label: usize, k: usize) -> Result<Vec<f64>> {
    if label >= k {
        return Err(Error::IndexOutOfRange {
            index: label,
            len: k,
        });
    }
    let mut v = vec![0.0; k];
    v[label] = 1.0;
    Ok(v)
}
