use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::nn::Tensor;

use super::{median_filter, min_max_normalize, resize_bilinear, to_rgb, RawImage};

#[derive(Debug, Clone, PartialEq)]
pub struct PreprocessConfig {
    pub target_height: usize,
    pub target_width: usize,
    /// Median filter window; must be odd. 1 disables filtering.
    pub filter_kernel: usize,
    pub n_min: f64,
    pub n_max: f64,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        PreprocessConfig {
            target_height: 224,
            target_width: 224,
            filter_kernel: 3,
            n_min: 0.0,
            n_max: 1.0,
        }
    }
}

impl PreprocessConfig {
    pub const CHANNELS: usize = 3;

    pub fn validate(&self) -> Result<()> {
        if self.target_height == 0 || self.target_width == 0 {
            return Err(Error::InvalidSize {
                height: self.target_height,
                width: self.target_width,
            });
        }
        if self.filter_kernel.is_multiple_of(2) {
            return Err(Error::InvalidKernel(self.filter_kernel));
        }
        if !self.n_min.is_finite() || !self.n_max.is_finite() || self.n_max <= self.n_min {
            return Err(Error::InvalidRange {
                n_min: self.n_min,
                n_max: self.n_max,
            });
        }
        Ok(())
    }
}

/// Network input: `height`×`width`×3 reals, row-major, channels interleaved.
#[derive(Debug, Clone, PartialEq)]
pub struct ProcessedTensor {
    pub height: usize,
    pub width: usize,
    pub values: Vec<f64>,
}

impl ProcessedTensor {
    pub fn shape(&self) -> (usize, usize, usize) {
        (self.height, self.width, PreprocessConfig::CHANNELS)
    }

    pub fn into_tensor(self) -> Tensor {
        Tensor::from_vec(vec![self.height, self.width, 3], self.values)
            .expect("processed tensor length matches its shape")
    }
}

/// RGB conversion, median denoising, bilinear resize, then Min-Max
/// normalization into `[n_min, n_max]`.
pub fn preprocess_pipeline(image: &RawImage, config: &PreprocessConfig) -> Result<ProcessedTensor> {
    config.validate()?;
    let rgb = to_rgb(image)?;
    let filtered = median_filter(&rgb, config.filter_kernel)?;
    let resized = resize_bilinear(&filtered, config.target_height, config.target_width)?;
    let raw: Vec<f64> = resized.pixels.iter().map(|&p| p as f64).collect();
    let values = min_max_normalize(&raw, config.n_min, config.n_max)?;
    Ok(ProcessedTensor {
        height: config.target_height,
        width: config.target_width,
        values,
    })
}

/// Debug dump: one line of comma-separated values, flattened row-major.
pub fn write_tensor_csv(tensor: &ProcessedTensor, path: &Path) -> Result<()> {
    let mut line = String::with_capacity(tensor.values.len() * 8);
    for (i, v) in tensor.values.iter().enumerate() {
        if i > 0 {
            line.push(',');
        }
        write!(line, "{v}").unwrap();
    }
    line.push('\n');
    fs::write(path, line).map_err(|e| Error::io_at(path, e))
}
