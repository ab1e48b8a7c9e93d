use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use super::{scan_dataset, DatasetManifest};
use crate::error::{Error, Result};
use crate::preprocess::{write_ppm, RawImage};
use crate::rng::SeededRng;

/// Parameters of the synthetic stand-in corpus.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SyntheticSpec {
    pub num_classes: usize,
    pub images_per_class: usize,
    pub height: usize,
    pub width: usize,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            num_classes: 5,
            images_per_class: 200,
            height: 32,
            width: 32,
            seed: 7,
        }
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidSynthetic(m.to_string()));
        if self.num_classes < 2 {
            return bad("need at least 2 classes");
        }
        if self.images_per_class < 1 {
            return bad("need at least 1 image per class");
        }
        if self.height < 8 || self.width < 8 {
            return bad("images must be at least 8x8");
        }
        Ok(())
    }

    pub fn class_name(&self, class: usize) -> String {
        let digits = (self.num_classes - 1).to_string().len().max(2);
        format!("class_{class:0digits$}")
    }
}

/// Renders image `index` of `class`.
///
/// Every class has its own base hue (evenly spaced around the colour wheel)
/// and its own stripe frequency and orientation. Per image the phase,
/// saturation and brightness are jittered and uniform pixel noise is added.
pub fn synthesize_image(spec: &SyntheticSpec, class: usize, index: usize) -> RawImage {
    let k = spec.num_classes as f64;
    let mut rng = SeededRng::derived(spec.seed, ((class as u64) << 32) | index as u64);
    let hue = (360.0 * class as f64 / k + rng.uniform(-8.0, 8.0)).rem_euclid(360.0);
    let saturation = rng.uniform(0.55, 0.85);
    let brightness = rng.uniform(0.5, 0.7);
    let frequency = 1.0 + class as f64;
    let angle = PI * class as f64 / k;
    let phase = rng.uniform(0.0, 2.0 * PI);
    let (h, w) = (spec.height, spec.width);
    let mut pixels = Vec::with_capacity(h * w * 3);
    for y in 0..h {
        for x in 0..w {
            let u = (x as f64 * angle.cos() + y as f64 * angle.sin()) / w as f64;
            let stripe = (2.0 * PI * frequency * u + phase).sin();
            let value = (brightness * (1.0 + 0.3 * stripe)).clamp(0.0, 1.0);
            for c in hsv_to_rgb(hue, saturation, value) {
                let noisy = c * 255.0 + rng.uniform(-12.0, 12.0);
                pixels.push(noisy.round().clamp(0.0, 255.0) as u8);
            }
        }
    }
    RawImage {
        height: h,
        width: w,
        channels: 3,
        pixels,
    }
}

fn hsv_to_rgb(hue: f64, s: f64, v: f64) -> [f64; 3] {
    let c = v * s;
    let hp = hue / 60.0;
    let x = c * (1.0 - (hp % 2.0 - 1.0).abs());
    let (r, g, b) = match hp as u32 {
        0 => (c, x, 0.0),
        1 => (x, c, 0.0),
        2 => (0.0, c, x),
        3 => (0.0, x, c),
        4 => (x, 0.0, c),
        _ => (c, 0.0, x),
    };
    let m = v - c;
    [r + m, g + m, b + m]
}

/// Writes `out/<class_name>/img_<i>.ppm` for every class and image, then
/// returns the scan of the written tree.
pub fn generate_synthetic_corpus(spec: &SyntheticSpec, out: &Path) -> Result<DatasetManifest> {
    spec.validate()?;
    for class in 0..spec.num_classes {
        let dir = out.join(spec.class_name(class));
        fs::create_dir_all(&dir).map_err(|e| Error::io_at(&dir, e))?;
        for i in 0..spec.images_per_class {
            let image = synthesize_image(spec, class, i);
            write_ppm(&image, &dir.join(format!("img_{i:05}.ppm")))?;
        }
    }
    scan_dataset(out)
}
