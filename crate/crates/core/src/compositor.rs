//! Front-to-back merging of non-binary coverage fragments.
//!
//! Each incoming fragment mask is clipped by the coverage already in the
//! buffer, `min(Λᶠ, 1−Λᵇ)`, then added, so the buffer mask can never exceed
//! one and fully saturated pixels occlude everything behind them. Data
//! buffers accumulate color premultiplied by clipped coverage; the division
//! back out happens only at image encode.
//!
//! Primitive order matters: callers must merge whole primitives
//! front-to-back. A binary depth-tested mode is provided for aliased
//! rasterization, which needs no ordering.

use crate::geometry::Triangle3;
use crate::math::Vec3;
use crate::rmaa::Fragment;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CompositorError {
    #[error("mask merge overflow ({0}): clipping contract violated")]
    MaskOverflow(f64),
}

/// Clips a fragment mask against buffered coverage; `alpha` multiplies in a
/// texture-alpha mask when alpha-blending is active.
pub fn clip_mask(fragment: f64, buffer: f64, alpha: Option<f64>) -> f64 {
    fragment.min(1.0 - buffer) * alpha.unwrap_or(1.0)
}

/// Adds an already-clipped fragment mask to the buffer mask. Errors if the
/// result overshoots one beyond tolerance, which means the caller skipped
/// clipping.
pub fn merge_mask(buffer: f64, clipped: f64) -> Result<f64, CompositorError> {
    let merged = buffer + clipped;
    if merged > 1.0 + 1e-9 {
        return Err(CompositorError::MaskOverflow(merged));
    }
    Ok(merged.min(1.0))
}

/// Data pass: `Λᶠ′·Fᶠ + Fᵇ` per channel, in linear color.
pub fn merge_data(buffer: [f64; 4], fragment: [f64; 4], clipped: f64) -> [f64; 4] {
    [
        clipped * fragment[0] + buffer[0],
        clipped * fragment[1] + buffer[1],
        clipped * fragment[2] + buffer[2],
        clipped * fragment[3] + buffer[3],
    ]
}

/// Sorts primitives front-to-back by nearest-vertex distance to the eye.
/// The sort is stable, so equal keys keep submission order. For
/// interpenetrating primitives this is best effort; per-pixel order may be
/// wrong without spatial splitting.
pub fn sort_front_to_back(primitives: &mut [Triangle3], eye: Vec3) {
    primitives.sort_by(|p, q| {
        let kp = nearest_vertex_distance(p, eye);
        let kq = nearest_vertex_distance(q, eye);
        kp.partial_cmp(&kq).unwrap_or(std::cmp::Ordering::Equal)
    });
}

fn nearest_vertex_distance(tri: &Triangle3, eye: Vec3) -> f64 {
    tri.positions
        .iter()
        .map(|&v| (v - eye).length())
        .fold(f64::INFINITY, f64::min)
}

/// Coverage, premultiplied linear RGBA and depth/distance planes.
#[derive(Debug, Clone)]
pub struct Framebuffer {
    width: u32,
    height: u32,
    coverage: Vec<f64>,
    data: Vec<[f64; 4]>,
    depth: Vec<f64>,
}

impl Framebuffer {
    pub fn new(width: u32, height: u32) -> Framebuffer {
        assert!(width > 0 && height > 0, "framebuffer extent must be positive");
        let n = (width * height) as usize;
        Framebuffer {
            width,
            height,
            coverage: vec![0.0; n],
            data: vec![[0.0; 4]; n],
            depth: vec![f64::INFINITY; n],
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn extent(&self) -> [u32; 2] {
        [self.width, self.height]
    }

    fn index(&self, pixel: [u32; 2]) -> usize {
        debug_assert!(pixel[0] < self.width && pixel[1] < self.height);
        (pixel[1] * self.width + pixel[0]) as usize
    }

    pub fn coverage_at(&self, pixel: [u32; 2]) -> f64 {
        self.coverage[self.index(pixel)]
    }

    pub fn data_at(&self, pixel: [u32; 2]) -> [f64; 4] {
        self.data[self.index(pixel)]
    }

    pub fn depth_at(&self, pixel: [u32; 2]) -> f64 {
        self.depth[self.index(pixel)]
    }

    /// Ordered front-to-back merge of one fragment. With `alpha_blend` the
    /// fragment's color alpha acts as an anti-aliased alpha-to-coverage
    /// mask.
    pub fn merge_fragment(
        &mut self,
        frag: &Fragment,
        alpha_blend: bool,
    ) -> Result<(), CompositorError> {
        let i = self.index(frag.pixel);
        let alpha = alpha_blend.then_some(frag.data.color[3]);
        let clipped = clip_mask(frag.coverage, self.coverage[i], alpha);
        if clipped <= 0.0 {
            return Ok(());
        }
        self.coverage[i] = merge_mask(self.coverage[i], clipped)?;
        self.data[i] = merge_data(self.data[i], frag.data.color, clipped);
        if frag.depth < self.depth[i] {
            self.depth[i] = frag.depth;
        }
        Ok(())
    }

    /// Binary depth-tested merge for aliased rasterization; no ordering
    /// requirement.
    pub fn merge_fragment_depth_tested(&mut self, frag: &Fragment) {
        let i = self.index(frag.pixel);
        if frag.depth < self.depth[i] {
            self.depth[i] = frag.depth;
            self.coverage[i] = 1.0;
            self.data[i] = frag.data.color;
        }
    }

    /// Fills the remaining `1−Λᵇ` of every pixel with a background color and
    /// saturates coverage.
    pub fn fill_background(&mut self, color: [f64; 4]) {
        for i in 0..self.coverage.len() {
            let rest = 1.0 - self.coverage[i];
            if rest > 0.0 {
                self.data[i] = merge_data(self.data[i], color, rest);
                self.coverage[i] = 1.0;
            }
        }
    }

    /// Multiplies the color planes by a per-pixel linear mask (used to
    /// apply a vignette channel to a finished composite).
    pub fn modulate(&mut self, mask: impl Fn(u32, u32) -> f64) {
        for y in 0..self.height {
            for x in 0..self.width {
                let i = (y * self.width + x) as usize;
                let m = mask(x, y);
                for c in 0..4 {
                    self.data[i][c] *= m;
                }
            }
        }
    }
}
