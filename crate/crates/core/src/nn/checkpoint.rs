//! Checkpoint values and their on-disk form.
//!
//! ```text
//! LPCKPT1\n
//! key = value lines (architecture, epoch, training setup, history, metadata)
//! \n
//! parameters: little-endian f64, layer by layer, weights then biases
//! ```
//!
//! `docs/checkpoint-format.md` lists every header key.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::{LayerSpec, ModelConfig, TrainConfig};
use crate::error::{Error, Result};

pub const MAGIC: &[u8] = b"LPCKPT1\n";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochStats {
    pub loss: f64,
    pub accuracy: f64,
}

/// Architecture, parameters and provenance of a (possibly trained) model.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub config: ModelConfig,
    /// One flat array per layer: weights followed by biases. Parameter-free
    /// layers hold an empty array.
    pub parameters: Vec<Vec<f64>>,
    pub epoch: usize,
    pub history: Vec<EpochStats>,
    pub train_config: Option<TrainConfig>,
    /// Free-form `key = value` pairs carried along by front ends.
    pub metadata: Vec<(String, String)>,
}

impl Checkpoint {
    pub fn new(config: ModelConfig, parameters: Vec<Vec<f64>>) -> Self {
        Checkpoint {
            config,
            parameters,
            epoch: 0,
            history: Vec::new(),
            train_config: None,
            metadata: Vec::new(),
        }
    }

    pub fn metadata(&self, key: &str) -> Option<&str> {
        self.metadata
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn set_metadata(&mut self, key: &str, value: impl Into<String>) {
        let value = value.into();
        match self.metadata.iter_mut().find(|(k, _)| k == key) {
            Some(entry) => entry.1 = value,
            None => self.metadata.push((key.to_string(), value)),
        }
    }

    /// Checks the parameter arrays against the architecture.
    pub fn validate(&self) -> Result<()> {
        let shapes = self.config.param_shapes()?;
        if shapes.len() != self.parameters.len() {
            return Err(Error::Checkpoint(format!(
                "{} parameter arrays for {} layers",
                self.parameters.len(),
                shapes.len()
            )));
        }
        for (i, (s, p)) in shapes.iter().zip(&self.parameters).enumerate() {
            if s.total() != p.len() {
                return Err(Error::Checkpoint(format!(
                    "layer {i}: {} parameters, expected {}",
                    p.len(),
                    s.total()
                )));
            }
        }
        Ok(())
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        self.validate()?;
        let mut header = String::new();
        let c = &self.config;
        let (h, w, ch) = c.input_shape;
        writeln!(header, "name = {}", c.name).unwrap();
        writeln!(header, "input_shape = {h} {w} {ch}").unwrap();
        writeln!(header, "num_classes = {}", c.num_classes).unwrap();
        for layer in &c.layers {
            writeln!(header, "layer = {layer}").unwrap();
        }
        writeln!(header, "epoch = {}", self.epoch).unwrap();
        writeln!(header, "loss = cross_entropy").unwrap();
        writeln!(header, "optimizer = sgd_momentum").unwrap();
        if let Some(t) = &self.train_config {
            writeln!(header, "train.epochs = {}", t.epochs).unwrap();
            writeln!(header, "train.batch_size = {}", t.batch_size).unwrap();
            writeln!(header, "train.learning_rate = {}", t.learning_rate).unwrap();
            writeln!(header, "train.momentum = {}", t.momentum).unwrap();
            writeln!(header, "train.seed = {}", t.seed).unwrap();
        }
        for (i, e) in self.history.iter().enumerate() {
            writeln!(header, "history = {} {} {}", i + 1, e.loss, e.accuracy).unwrap();
        }
        for (k, v) in &self.metadata {
            if k.is_empty()
                || k.contains(|ch: char| ch.is_whitespace() || ch == '=')
                || v.contains('\n')
            {
                return Err(Error::Checkpoint(format!(
                    "metadata entry `{k}` cannot be stored"
                )));
            }
            writeln!(header, "meta.{k} = {v}").unwrap();
        }
        let total: usize = self.parameters.iter().map(Vec::len).sum();
        writeln!(header, "parameters = {total}").unwrap();
        header.push('\n');

        let mut out = Vec::with_capacity(MAGIC.len() + header.len() + total * 8);
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(header.as_bytes());
        for v in self.parameters.iter().flatten() {
            out.extend_from_slice(&v.to_le_bytes());
        }
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let bad = |m: String| Error::Checkpoint(m);
        let rest = bytes
            .strip_prefix(MAGIC)
            .ok_or_else(|| bad("missing LPCKPT1 magic".into()))?;
        let end = rest
            .windows(2)
            .position(|w| w == b"\n\n")
            .ok_or_else(|| bad("header is not terminated by a blank line".into()))?;
        let header =
            std::str::from_utf8(&rest[..end + 1]).map_err(|_| bad("header is not UTF-8".into()))?;
        let body = &rest[end + 2..];

        let mut name = None;
        let mut input_shape = None;
        let mut num_classes = None;
        let mut layers = Vec::new();
        let mut epoch = 0;
        let mut history = Vec::new();
        let mut metadata = Vec::new();
        let mut total = None;
        let mut train = [None::<&str>; 5];
        for line in header.lines() {
            let (key, value) = line
                .split_once(" = ")
                .ok_or_else(|| bad(format!("header line `{line}`")))?;
            let num = |v: &str| -> Result<usize> {
                v.parse()
                    .map_err(|_| bad(format!("`{key}`: `{v}` is not an integer")))
            };
            let real = |v: &str| -> Result<f64> {
                v.parse()
                    .map_err(|_| bad(format!("`{key}`: `{v}` is not a number")))
            };
            match key {
                "name" => name = Some(value.to_string()),
                "input_shape" => {
                    let dims = value.split(' ').map(num).collect::<Result<Vec<_>>>()?;
                    let [h, w, c] = dims[..] else {
                        return Err(bad("input_shape needs three values".into()));
                    };
                    input_shape = Some((h, w, c));
                }
                "num_classes" => num_classes = Some(num(value)?),
                "layer" => layers.push(value.parse::<LayerSpec>()?),
                "epoch" => epoch = num(value)?,
                "loss" | "optimizer" => {}
                "history" => {
                    let parts: Vec<&str> = value.split(' ').collect();
                    let [idx, loss, acc] = parts[..] else {
                        return Err(bad(format!("history entry `{value}`")));
                    };
                    if num(idx)? != history.len() + 1 {
                        return Err(bad("history entries out of order".into()));
                    }
                    history.push(EpochStats {
                        loss: real(loss)?,
                        accuracy: real(acc)?,
                    });
                }
                "parameters" => total = Some(num(value)?),
                "train.epochs" => train[0] = Some(value),
                "train.batch_size" => train[1] = Some(value),
                "train.learning_rate" => train[2] = Some(value),
                "train.momentum" => train[3] = Some(value),
                "train.seed" => train[4] = Some(value),
                k => match k.strip_prefix("meta.") {
                    Some(mk) => metadata.push((mk.to_string(), value.to_string())),
                    None => return Err(bad(format!("unknown header key `{k}`"))),
                },
            }
        }
        let train_config = match train {
            [None, None, None, None, None] => None,
            [Some(e), Some(b), Some(lr), Some(m), Some(s)] => Some(TrainConfig {
                epochs: e.parse().map_err(|_| bad("train.epochs".into()))?,
                batch_size: b.parse().map_err(|_| bad("train.batch_size".into()))?,
                learning_rate: lr.parse().map_err(|_| bad("train.learning_rate".into()))?,
                momentum: m.parse().map_err(|_| bad("train.momentum".into()))?,
                seed: s.parse().map_err(|_| bad("train.seed".into()))?,
            }),
            _ => return Err(bad("incomplete train.* block".into())),
        };
        let config = ModelConfig {
            name: name.ok_or_else(|| bad("missing name".into()))?,
            input_shape: input_shape.ok_or_else(|| bad("missing input_shape".into()))?,
            layers,
            num_classes: num_classes.ok_or_else(|| bad("missing num_classes".into()))?,
        };
        let shapes = config.param_shapes()?;
        let expected: usize = shapes.iter().map(|s| s.total()).sum();
        let total = total.ok_or_else(|| bad("missing parameters count".into()))?;
        if total != expected || body.len() != total * 8 {
            return Err(bad(format!(
                "expected {expected} parameters, header says {total}, body holds {} bytes",
                body.len()
            )));
        }
        let mut values = body
            .chunks_exact(8)
            .map(|b| f64::from_le_bytes(b.try_into().expect("8-byte chunk")));
        let parameters = shapes
            .iter()
            .map(|s| values.by_ref().take(s.total()).collect())
            .collect();
        Ok(Checkpoint {
            config,
            parameters,
            epoch,
            history,
            train_config,
            metadata,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_bytes()?).map_err(|e| Error::io_at(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| Error::io_at(path, e))?;
        Self::from_bytes(&bytes)
    }
}
