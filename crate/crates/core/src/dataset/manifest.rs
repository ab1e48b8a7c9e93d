use std::fs;
use std::path::{Component, Path, PathBuf};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ClassLabel {
    pub index: usize,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LabeledImage {
    pub path: PathBuf,
    pub label: usize,
}

/// An ordered list of labelled images together with the class table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetManifest {
    records: Vec<LabeledImage>,
    classes: Vec<ClassLabel>,
    per_class_counts: Vec<usize>,
}

impl DatasetManifest {
    /// Builds a manifest from class names (index = position) and records.
    pub fn new(class_names: Vec<String>, records: Vec<LabeledImage>) -> Result<Self> {
        let k = class_names.len();
        let mut seen = std::collections::HashSet::new();
        for name in &class_names {
            if !seen.insert(name.as_str()) {
                return Err(Error::DuplicateClass(name.clone()));
            }
        }
        let mut per_class_counts = vec![0; k];
        for r in &records {
            if r.label >= k {
                return Err(Error::IndexOutOfRange {
                    index: r.label,
                    len: k,
                });
            }
            per_class_counts[r.label] += 1;
        }
        let classes = class_names
            .into_iter()
            .enumerate()
            .map(|(index, name)| ClassLabel { index, name })
            .collect();
        Ok(DatasetManifest {
            records,
            classes,
            per_class_counts,
        })
    }

    pub fn records(&self) -> &[LabeledImage] {
        &self.records
    }

    pub fn classes(&self) -> &[ClassLabel] {
        &self.classes
    }

    pub fn class_names(&self) -> Vec<String> {
        self.classes.iter().map(|c| c.name.clone()).collect()
    }

    pub fn per_class_counts(&self) -> &[usize] {
        &self.per_class_counts
    }

    pub fn num_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

pub const MANIFEST_HEADER: [&str; 3] = ["path", "label_index", "label_name"];

/// Writes `path,label_index,label_name` rows with LF endings. Image paths are
/// stored relative to the manifest's own directory.
pub fn write_manifest_csv(manifest: &DatasetManifest, path: &Path) -> Result<()> {
    let base = absolute(path.parent().unwrap_or(Path::new("")))?;
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::Table(e.to_string());
    writer.write_record(MANIFEST_HEADER).map_err(csv_err)?;
    for record in &manifest.records {
        let rel = relative_to(&absolute(&record.path)?, &base);
        let rel = rel.to_string_lossy().replace('\\', "/");
        let label = record.label.to_string();
        let name = &manifest.classes[record.label].name;
        writer
            .write_record([rel.as_str(), label.as_str(), name.as_str()])
            .map_err(csv_err)?;
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| Error::Table(e.to_string()))?;
    fs::write(path, bytes).map_err(|e| Error::io_at(path, e))
}

/// Reads a manifest CSV. Record paths are resolved against the manifest's
/// directory. Label indices must be dense and each index must carry a single
/// name.
pub fn read_manifest_csv(path: &Path) -> Result<DatasetManifest> {
    let text = fs::read_to_string(path).map_err(|e| Error::io_at(path, e))?;
    let base = path.parent().unwrap_or(Path::new(""));
    let bad = |line: u64, msg: String| Error::Manifest {
        path: path.to_path_buf(),
        line,
        msg,
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| bad(1, e.to_string()))?;
    if header.iter().ne(MANIFEST_HEADER) {
        return Err(bad(
            1,
            format!("expected header `{}`", MANIFEST_HEADER.join(",")),
        ));
    }
    let mut names: Vec<Option<String>> = Vec::new();
    let mut records = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            bad(line, e.to_string())
        })?;
        let line = row.position().map_or(0, |p| p.line());
        let label: usize = row[1]
            .trim()
            .parse()
            .map_err(|_| bad(line, format!("label_index `{}` is not an integer", &row[1])))?;
        if names.len() <= label {
            names.resize(label + 1, None);
        }
        match &names[label] {
            Some(existing) if existing != &row[2] => {
                return Err(bad(
                    line,
                    format!("label {label} named both `{existing}` and `{}`", &row[2]),
                ))
            }
            Some(_) => {}
            None => names[label] = Some(row[2].to_string()),
        }
        if row[0].is_empty() {
            return Err(bad(line, "empty path".into()));
        }
        records.push(LabeledImage {
            path: base.join(&row[0]),
            label,
        });
    }
    let names = names
        .into_iter()
        .enumerate()
        .map(|(i, n)| n.ok_or_else(|| bad(0, format!("label index {i} has no records"))))
        .collect::<Result<Vec<_>>>()?;
    DatasetManifest::new(names, records).map_err(|e| bad(0, e.to_string()))
}

fn absolute(path: &Path) -> Result<PathBuf> {
    let abs = std::path::absolute(path).map_err(|e| Error::io_at(path, e))?;
    // lexically drop `.` and resolve `..`
    let mut out = PathBuf::new();
    for comp in abs.components() {
        match comp {
            Component::CurDir => {}
            Component::ParentDir => {
                out.pop();
            }
            other => out.push(other),
        }
    }
    Ok(out)
}

fn relative_to(path: &Path, base: &Path) -> PathBuf {
    let p: Vec<_> = path.components().collect();
    let b: Vec<_> = base.components().collect();
    let common = p.iter().zip(&b).take_while(|(x, y)| x == y).count();
    let mut out = PathBuf::new();
    for _ in common..b.len() {
        out.push("..");
    }
    for comp in &p[common..] {
        out.push(comp);
    }
    out
}
