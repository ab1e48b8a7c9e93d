use super::{DatasetManifest, LabeledImage};
use crate::error::{Error, Result};
use crate::rng::SeededRng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub seed: u64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            train_fraction: 0.8,
            seed: 0,
        }
    }
}

/// Training share of a class with `n` records: `fraction * n` rounded half
/// up, kept within `[1, n - 1]` so both sides stay non-empty.
pub fn train_count(n: usize, fraction: f64) -> usize {
    let exact = fraction * n as f64;
    // the tolerance absorbs binary representation error at exact halves
    let rounded = (exact + 0.5 + 1e-9).floor() as usize;
    rounded.clamp(1, n.saturating_sub(1).max(1))
}

/// Per-class seeded split. Within each class the records are Fisher-Yates
/// shuffled and the first `train_count` go to training. Both outputs keep
/// the original manifest order.
pub fn stratified_split(
    manifest: &DatasetManifest,
    spec: &SplitSpec,
) -> Result<(DatasetManifest, DatasetManifest)> {
    if !(spec.train_fraction > 0.0 && spec.train_fraction < 1.0) {
        return Err(Error::InvalidFraction(spec.train_fraction));
    }
    let records = manifest.records();
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); manifest.num_classes()];
    for (i, r) in records.iter().enumerate() {
        by_class[r.label].push(i);
    }
    let mut rng = SeededRng::new(spec.seed);
    let mut in_train = vec![false; records.len()];
    for (class, members) in by_class.iter_mut().enumerate() {
        if members.len() < 2 {
            return Err(Error::ClassTooSmall(manifest.classes()[class].name.clone()));
        }
        rng.shuffle(members);
        for &i in &members[..train_count(members.len(), spec.train_fraction)] {
            in_train[i] = true;
        }
    }
    let pick = |want: bool| -> Vec<LabeledImage> {
        records
            .iter()
            .zip(&in_train)
            .filter(|(_, &t)| t == want)
            .map(|(r, _)| r.clone())
            .collect()
    };
    let names = manifest.class_names();
    Ok((
        DatasetManifest::new(names.clone(), pick(true))?,
        DatasetManifest::new(names, pick(false))?,
    ))
}
