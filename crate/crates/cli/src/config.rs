//! Run configuration files: `key = value` lines, `#` comments, dotted keys.
//!
//! ```text
//! # where the data comes from: one of data.train_manifest, data.root, synth.*
//! data.train_manifest = splits/train.csv
//! data.test_manifest = splits/test.csv
//! model.preset = mini_vgg
//! model.name = MiniVGG
//! preprocess.height = 32
//! preprocess.width = 32
//! train.epochs = 15
//! output.dir = runs/mini
//! ```
//!
//! Relative paths are resolved against the directory holding the file.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use leafclass::dataset::{SplitSpec, SyntheticSpec};
use leafclass::nn::TrainConfig;
use leafclass::preprocess::PreprocessConfig;

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line > 0 {
            write!(f, "line {}: {}", self.line, self.message)
        } else {
            f.write_str(&self.message)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DataSource {
    /// Pre-split manifests.
    Manifest {
        train: PathBuf,
        test: Option<PathBuf>,
    },
    /// Directory-per-class corpus, scanned and split at run time.
    Root(PathBuf),
    /// Synthetic corpus generated into the output directory.
    Synthetic(SyntheticSpec),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub data: DataSource,
    pub split: SplitSpec,
    pub preprocess: PreprocessConfig,
    pub preset: String,
    pub model_name: String,
    pub train: TrainConfig,
    pub output_dir: PathBuf,
}

const PRESETS: [&str; 2] = ["mini_vgg", "vgg16_shape"];

const KEYS: [&str; 23] = [
    "data.train_manifest",
    "data.test_manifest",
    "data.root",
    "synth.classes",
    "synth.per_class",
    "synth.height",
    "synth.width",
    "synth.seed",
    "split.fraction",
    "split.seed",
    "preprocess.height",
    "preprocess.width",
    "preprocess.filter_kernel",
    "preprocess.n_min",
    "preprocess.n_max",
    "model.preset",
    "model.name",
    "train.epochs",
    "train.batch_size",
    "train.learning_rate",
    "train.momentum",
    "train.seed",
    "output.dir",
];

impl RunConfig {
    pub fn parse(text: &str, base: &Path) -> Result<Self, ConfigError> {
        let mut entries: BTreeMap<&str, (usize, &str)> = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |m: String| ConfigError {
                line: line_no,
                message: m,
            };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected `key = value`, got `{line}`")))?;
            let (key, value) = (key.trim(), value.trim());
            if !KEYS.contains(&key) {
                return Err(err(format!("unknown key `{key}`")));
            }
            if entries.insert(key, (line_no, value)).is_some() {
                return Err(err(format!("`{key}` given twice")));
            }
        }

        fn get<T: std::str::FromStr>(
            entries: &BTreeMap<&str, (usize, &str)>,
            key: &str,
            default: T,
        ) -> Result<T, ConfigError> {
            match entries.get(key) {
                None => Ok(default),
                Some(&(line, v)) => v.parse().map_err(|_| ConfigError {
                    line,
                    message: format!("`{key}`: cannot parse `{v}`"),
                }),
            }
        }
        let path = |key: &str| entries.get(key).map(|&(_, v)| base.join(v));

        let synth_keys = entries.keys().any(|k| k.starts_with("synth."));
        let sources = [
            entries.contains_key("data.train_manifest"),
            entries.contains_key("data.root"),
            synth_keys,
        ];
        let data = match sources {
            [true, false, false] => DataSource::Manifest {
                train: path("data.train_manifest").unwrap(),
                test: path("data.test_manifest"),
            },
            [false, true, false] => DataSource::Root(path("data.root").unwrap()),
            [false, false, true] => {
                let d = SyntheticSpec::default();
                DataSource::Synthetic(SyntheticSpec {
                    num_classes: get(&entries, "synth.classes", d.num_classes)?,
                    images_per_class: get(&entries, "synth.per_class", d.images_per_class)?,
                    height: get(&entries, "synth.height", d.height)?,
                    width: get(&entries, "synth.width", d.width)?,
                    seed: get(&entries, "synth.seed", d.seed)?,
                })
            }
            [false, false, false] => {
                return Err(ConfigError {
                    line: 0,
                    message: "no data source: set data.train_manifest, data.root or synth.*".into(),
                })
            }
            _ => {
                return Err(ConfigError {
                    line: 0,
                    message: "choose exactly one of data.train_manifest, data.root, synth.*".into(),
                })
            }
        };
        if entries.contains_key("data.test_manifest")
            && !matches!(data, DataSource::Manifest { .. })
        {
            return Err(ConfigError {
                line: entries["data.test_manifest"].0,
                message: "data.test_manifest needs data.train_manifest".into(),
            });
        }

        let sd = SplitSpec::default();
        let pd = PreprocessConfig::default();
        let td = TrainConfig::default();
        let preset: String = get(&entries, "model.preset", "mini_vgg".to_string())?;
        if !PRESETS.contains(&preset.as_str()) {
            return Err(ConfigError {
                line: entries["model.preset"].0,
                message: format!(
                    "unknown preset `{preset}` (expected one of {})",
                    PRESETS.join(", ")
                ),
            });
        }
        let config = RunConfig {
            data,
            split: SplitSpec {
                train_fraction: get(&entries, "split.fraction", sd.train_fraction)?,
                seed: get(&entries, "split.seed", sd.seed)?,
            },
            preprocess: PreprocessConfig {
                target_height: get(&entries, "preprocess.height", pd.target_height)?,
                target_width: get(&entries, "preprocess.width", pd.target_width)?,
                filter_kernel: get(&entries, "preprocess.filter_kernel", pd.filter_kernel)?,
                n_min: get(&entries, "preprocess.n_min", pd.n_min)?,
                n_max: get(&entries, "preprocess.n_max", pd.n_max)?,
            },
            model_name: get(&entries, "model.name", preset.clone())?,
            preset,
            train: TrainConfig {
                epochs: get(&entries, "train.epochs", td.epochs)?,
                batch_size: get(&entries, "train.batch_size", td.batch_size)?,
                learning_rate: get(&entries, "train.learning_rate", td.learning_rate)?,
                momentum: get(&entries, "train.momentum", td.momentum)?,
                seed: get(&entries, "train.seed", td.seed)?,
            },
            output_dir: path("output.dir").unwrap_or_else(|| base.join("out")),
        };
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> Result<(), ConfigError> {
        let err = |m: String| ConfigError {
            line: 0,
            message: m,
        };
        self.preprocess.validate().map_err(|e| err(e.to_string()))?;
        self.train.validate().map_err(|e| err(e.to_string()))?;
        if !(self.split.train_fraction > 0.0 && self.split.train_fraction < 1.0) {
            return Err(err(format!(
                "split.fraction {} is not in (0, 1)",
                self.split.train_fraction
            )));
        }
        if let DataSource::Synthetic(spec) = &self.data {
            spec.validate().map_err(|e| err(e.to_string()))?;
        }
        Ok(())
    }
}
