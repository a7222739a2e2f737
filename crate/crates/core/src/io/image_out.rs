//! Final image encoding: un-premultiply by coverage, apply the gamma
//! transfer, quantize to 8-bit PNG.

use super::IoError;
use crate::compositor::Framebuffer;
use crate::map_gen::gamma_encode;
use image::{Rgba, RgbaImage};
use std::path::Path;

/// Encodes a framebuffer into an 8-bit RGBA image. Color channels are
/// divided back out of premultiplied storage wherever coverage is positive
/// and gamma-encoded with `w^(1/γ)`; alpha carries the coverage mask
/// linearly.
pub fn encode_framebuffer(fb: &Framebuffer, gamma: f64) -> RgbaImage {
    let mut image = RgbaImage::new(fb.width(), fb.height());
    for y in 0..fb.height() {
        for x in 0..fb.width() {
            let coverage = fb.coverage_at([x, y]);
            let data = fb.data_at([x, y]);
            let mut px = [0u8; 4];
            for c in 0..3 {
                let linear = if coverage > 0.0 { data[c] / coverage } else { 0.0 };
                px[c] = encode_channel(linear, gamma);
            }
            px[3] = (coverage.clamp(0.0, 1.0) * 255.0).round() as u8;
            image.put_pixel(x, y, Rgba(px));
        }
    }
    image
}

/// One linear value through the gamma transfer to an 8-bit level.
pub fn encode_channel(linear: f64, gamma: f64) -> u8 {
    (gamma_encode(linear.clamp(0.0, 1.0), gamma) * 255.0).round() as u8
}

/// Writes the framebuffer as a PNG file.
pub fn write_image(fb: &Framebuffer, path: impl AsRef<Path>, gamma: f64) -> Result<(), IoError> {
    encode_framebuffer(fb, gamma)
        .save(path.as_ref())
        .map_err(|e| IoError::Image(e.to_string()))
}

/// Loads an 8-bit RGBA image (for comparisons and goldens).
pub fn read_image(path: impl AsRef<Path>) -> Result<RgbaImage, IoError> {
    Ok(image::open(path.as_ref())
        .map_err(|e| IoError::Image(e.to_string()))?
        .to_rgba8())
}
