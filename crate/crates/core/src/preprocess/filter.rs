use crate::error::{Error, Result};

use super::RawImage;

/// Per-channel median over a `kernel`×`kernel` window with replicate padding.
pub fn median_filter(image: &RawImage, kernel: usize) -> Result<RawImage> {
    if kernel.is_multiple_of(2) || kernel > image.height.min(image.width) {
        return Err(Error::InvalidKernel(kernel));
    }
    if kernel == 1 {
        return Ok(image.clone());
    }
    let r = (kernel / 2) as isize;
    let (h, w, ch) = (image.height, image.width, image.channels);
    let clamp = |v: isize, n: usize| v.clamp(0, n as isize - 1) as usize;
    let mut window = Vec::with_capacity(kernel * kernel);
    let mut pixels = vec![0u8; image.pixels.len()];
    for y in 0..h {
        for x in 0..w {
            for c in 0..ch {
                window.clear();
                for dy in -r..=r {
                    let sy = clamp(y as isize + dy, h);
                    for dx in -r..=r {
                        let sx = clamp(x as isize + dx, w);
                        window.push(image.get(sy, sx, c));
                    }
                }
                let mid = window.len() / 2;
                let (_, median, _) = window.select_nth_unstable(mid);
                pixels[(y * w + x) * ch + c] = *median;
            }
        }
    }
    Ok(RawImage {
        height: h,
        width: w,
        channels: ch,
        pixels,
    })
}
