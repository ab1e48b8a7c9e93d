use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

/// 8-bit image, row-major with interleaved channels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawImage {
    pub height: usize,
    pub width: usize,
    pub channels: usize,
    pub pixels: Vec<u8>,
}

impl RawImage {
    pub fn new(height: usize, width: usize, channels: usize, pixels: Vec<u8>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::InvalidSize { height, width });
        }
        if !matches!(channels, 1 | 3 | 4) {
            return Err(Error::UnsupportedFormat(format!("{channels} channels")));
        }
        if pixels.len() != height * width * channels {
            return Err(Error::InvalidShape(format!(
                "{} pixel bytes for a {height}x{width}x{channels} image",
                pixels.len()
            )));
        }
        Ok(RawImage {
            height,
            width,
            channels,
            pixels,
        })
    }

    pub fn filled(height: usize, width: usize, rgb: [u8; 3]) -> Self {
        let pixels = rgb
            .iter()
            .copied()
            .cycle()
            .take(height * width * 3)
            .collect();
        RawImage {
            height,
            width,
            channels: 3,
            pixels,
        }
    }

    #[inline]
    pub fn get(&self, y: usize, x: usize, c: usize) -> u8 {
        self.pixels[(y * self.width + x) * self.channels + c]
    }
}

/// Parses a binary PPM (`P6`, maxval 255). Comments in the header are allowed.
pub fn read_ppm(bytes: &[u8]) -> Result<RawImage> {
    let bad = |msg: &str| Error::UnsupportedFormat(format!("PPM: {msg}"));
    if bytes.len() < 2 || &bytes[..2] != b"P6" {
        return Err(bad("missing P6 magic"));
    }
    let mut pos = 2;
    let mut fields = [0usize; 3];
    for field in fields.iter_mut() {
        loop {
            while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if pos < bytes.len() && bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
            } else {
                break;
            }
        }
        let start = pos;
        while pos < bytes.len() && bytes[pos].is_ascii_digit() {
            pos += 1;
        }
        if start == pos {
            return Err(bad("truncated header"));
        }
        *field = std::str::from_utf8(&bytes[start..pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| bad("header value out of range"))?;
    }
    let [width, height, maxval] = fields;
    if maxval != 255 {
        return Err(bad("only 8-bit (maxval 255) images are supported"));
    }
    // exactly one whitespace byte separates the header from the raster
    if pos >= bytes.len() || !bytes[pos].is_ascii_whitespace() {
        return Err(bad("truncated header"));
    }
    pos += 1;
    let len = width
        .checked_mul(height)
        .and_then(|n| n.checked_mul(3))
        .ok_or_else(|| bad("dimensions overflow"))?;
    if bytes.len() - pos < len {
        return Err(bad("truncated raster"));
    }
    RawImage::new(height, width, 3, bytes[pos..pos + len].to_vec())
}

/// Writes a 3-channel image as binary PPM.
pub fn write_ppm(image: &RawImage, path: &Path) -> Result<()> {
    if image.channels != 3 {
        return Err(Error::UnsupportedFormat(format!(
            "PPM output needs 3 channels, got {}",
            image.channels
        )));
    }
    let mut out = Vec::with_capacity(image.pixels.len() + 20);
    write!(out, "P6\n{} {}\n255\n", image.width, image.height)?;
    out.extend_from_slice(&image.pixels);
    fs::write(path, out).map_err(|e| Error::io_at(path, e))
}

/// Decodes an in-memory image: PPM natively, PNG and JPEG through `image`.
pub fn decode_image(bytes: &[u8]) -> Result<RawImage> {
    if bytes.starts_with(b"P6") {
        return read_ppm(bytes);
    }
    let decoded =
        ::image::load_from_memory(bytes).map_err(|e| Error::UnsupportedFormat(e.to_string()))?;
    let (width, height) = (decoded.width() as usize, decoded.height() as usize);
    use ::image::DynamicImage::*;
    match decoded {
        ImageLuma8(buf) => RawImage::new(height, width, 1, buf.into_raw()),
        ImageRgb8(buf) => RawImage::new(height, width, 3, buf.into_raw()),
        ImageRgba8(buf) => RawImage::new(height, width, 4, buf.into_raw()),
        other if other.color().has_alpha() => {
            RawImage::new(height, width, 4, other.to_rgba8().into_raw())
        }
        other if other.color().channel_count() == 1 => {
            RawImage::new(height, width, 1, other.to_luma8().into_raw())
        }
        other => RawImage::new(height, width, 3, other.to_rgb8().into_raw()),
    }
}

pub fn load_image(path: &Path) -> Result<RawImage> {
    let bytes = fs::read(path).map_err(|e| Error::io_at(path, e))?;
    decode_image(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ppm_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.ppm");
        let img = RawImage::new(2, 3, 3, (0..18).collect()).unwrap();
        write_ppm(&img, &path).unwrap();
        let bytes = fs::read(&path).unwrap();
        assert!(bytes.starts_with(b"P6\n3 2\n255\n"));
        assert_eq!(load_image(&path).unwrap(), img);
    }

    #[test]
    fn ppm_header_comments() {
        let mut bytes = b"P6\n# made by hand\n1 1\n255\n".to_vec();
        bytes.extend_from_slice(&[1, 2, 3]);
        let img = read_ppm(&bytes).unwrap();
        assert_eq!(img.pixels, vec![1, 2, 3]);
    }

    #[test]
    fn ppm_rejects_truncation_and_16_bit() {
        assert!(read_ppm(b"P6\n2 2\n255\n\x00\x01").is_err());
        assert!(read_ppm(b"P6\n1 1\n65535\n\x00\x00\x00\x00\x00\x00").is_err());
        assert!(read_ppm(b"P3\n1 1\n255\n0 0 0").is_err());
    }

    #[test]
    fn png_decodes_with_channel_count() {
        let mut buf = std::io::Cursor::new(Vec::new());
        let gray = ::image::GrayImage::from_raw(2, 1, vec![10, 200]).unwrap();
        gray.write_to(&mut buf, ::image::ImageFormat::Png).unwrap();
        let img = decode_image(buf.get_ref()).unwrap();
        assert_eq!((img.height, img.width, img.channels), (1, 2, 1));
        assert_eq!(img.pixels, vec![10, 200]);
    }

    #[test]
    fn garbage_is_unsupported() {
        assert!(matches!(
            decode_image(b"not an image"),
            Err(Error::UnsupportedFormat(_))
        ));
    }
}
