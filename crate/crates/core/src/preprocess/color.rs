use crate::error::{Error, Result};

use super::RawImage;

/// Converts to 3-channel RGB. Gray is replicated, alpha is composited over a
/// white background and dropped.
pub fn to_rgb(image: &RawImage) -> Result<RawImage> {
    let pixels = match image.channels {
        3 => return Ok(image.clone()),
        1 => image.pixels.iter().flat_map(|&g| [g, g, g]).collect(),
        4 => image
            .pixels
            .chunks_exact(4)
            .flat_map(|px| {
                let a = px[3] as u32;
                [0, 1, 2].map(|c| over_white(px[c] as u32, a))
            })
            .collect(),
        n => return Err(Error::UnsupportedFormat(format!("{n} channels"))),
    };
    Ok(RawImage {
        height: image.height,
        width: image.width,
        channels: 3,
        pixels,
    })
}

// round-half-up of (a*c + (255-a)*255) / 255, in integers
fn over_white(c: u32, a: u32) -> u8 {
    let num = a * c + (255 - a) * 255;
    ((2 * num + 255) / 510) as u8
}
