use crate::error::{Error, Result};

use super::RawImage;

/// Bilinear resampling with half-pixel centre alignment. Source coordinates
/// are `(dst + 0.5) * scale - 0.5`, clamped to the image; results are rounded
/// half up.
pub fn resize_bilinear(image: &RawImage, target_h: usize, target_w: usize) -> Result<RawImage> {
    if target_h == 0 || target_w == 0 {
        return Err(Error::InvalidSize {
            height: target_h,
            width: target_w,
        });
    }
    if (target_h, target_w) == (image.height, image.width) {
        return Ok(image.clone());
    }
    let ch = image.channels;
    let rows = sample_axis(image.height, target_h);
    let cols = sample_axis(image.width, target_w);
    let mut pixels = Vec::with_capacity(target_h * target_w * ch);
    for &(y0, y1, fy) in &rows {
        for &(x0, x1, fx) in &cols {
            for c in 0..ch {
                let p = |y, x| image.get(y, x, c) as f64;
                let top = p(y0, x0) + (p(y0, x1) - p(y0, x0)) * fx;
                let bottom = p(y1, x0) + (p(y1, x1) - p(y1, x0)) * fx;
                let v = top + (bottom - top) * fy;
                pixels.push((v + 0.5).floor().clamp(0.0, 255.0) as u8);
            }
        }
    }
    Ok(RawImage {
        height: target_h,
        width: target_w,
        channels: ch,
        pixels,
    })
}

/// For each destination index: the two source taps and the weight of the second.
fn sample_axis(src: usize, dst: usize) -> Vec<(usize, usize, f64)> {
    let scale = src as f64 / dst as f64;
    (0..dst)
        .map(|d| {
            let s = ((d as f64 + 0.5) * scale - 0.5).clamp(0.0, (src - 1) as f64);
            let i0 = s.floor() as usize;
            let i1 = (i0 + 1).min(src - 1);
            (i0, i1, s - i0 as f64)
        })
        .collect()
}
