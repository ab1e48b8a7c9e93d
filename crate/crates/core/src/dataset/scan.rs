use std::fs;
use std::path::{Path, PathBuf};

use log::warn;

use super::{DatasetManifest, LabeledImage};
use crate::error::{Error, Result};
use crate::preprocess::load_image;

/// A file that was present in a class directory but could not be decoded.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScanWarning {
    pub path: PathBuf,
    pub reason: String,
}

/// Scans `root/<class>/<image>` into a manifest, logging skipped files.
pub fn scan_dataset(root: &Path) -> Result<DatasetManifest> {
    scan_dataset_with_warnings(root).map(|(manifest, _)| manifest)
}

/// Like [`scan_dataset`], also returning the files that were skipped.
///
/// Classes are the subdirectories of `root` in lexicographic order; records
/// are listed class by class in sorted file-name order. Hidden entries and
/// plain files directly under `root` are ignored.
pub fn scan_dataset_with_warnings(root: &Path) -> Result<(DatasetManifest, Vec<ScanWarning>)> {
    let class_dirs = sorted_entries(root)?
        .into_iter()
        .filter(|p| p.is_dir())
        .collect::<Vec<_>>();
    if class_dirs.is_empty() {
        return Err(Error::NoClasses(root.to_path_buf()));
    }
    let mut names = Vec::with_capacity(class_dirs.len());
    let mut records = Vec::new();
    let mut warnings = Vec::new();
    for (label, dir) in class_dirs.iter().enumerate() {
        let name = dir
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        let before = records.len();
        for file in sorted_entries(dir)?.into_iter().filter(|p| p.is_file()) {
            match load_image(&file) {
                Ok(_) => records.push(LabeledImage { path: file, label }),
                Err(e) => {
                    warn!("skipping {}: {e}", file.display());
                    warnings.push(ScanWarning {
                        path: file,
                        reason: e.to_string(),
                    });
                }
            }
        }
        if records.len() == before {
            return Err(Error::EmptyClass(name));
        }
        names.push(name);
    }
    Ok((DatasetManifest::new(names, records)?, warnings))
}

fn sorted_entries(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io_at(dir, e))? {
        let entry = entry.map_err(|e| Error::io_at(dir, e))?;
        if entry.file_name().to_string_lossy().starts_with('.') {
            continue;
        }
        out.push(entry.path());
    }
    out.sort_by(|a, b| a.file_name().cmp(&b.file_name()));
    Ok(out)
}
