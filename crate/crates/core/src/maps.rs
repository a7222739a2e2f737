//! Lookup-map containers: STMaps (2-D coordinate lookups) and Perspective
//! Maps (unit view-sphere directions).
//!
//! Texel centers sit at `((i+½)/W, (j+½)/H)`, with `t` increasing downward
//! like image rows. Resolutions must be even on both axes so the optical
//! center falls between texels. Channels are stored as `f32`, matching the
//! 32-bit float exchange formats; all math upstream runs in `f64`.

use crate::math::{vec2, vec3, Vec2, Vec3};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MapError {
    #[error("map resolution {0}x{1} must be even on both axes")]
    OddResolution(u32, u32),
    #[error("map resolution {0}x{1} must be positive")]
    EmptyResolution(u32, u32),
    #[error("field of view {0:.1}° out of range for this output (must be {1})")]
    FovOutOfRange(f64, &'static str),
    #[error("near-clip value {0} must lie in (0, 1)")]
    InvalidNearClip(f64),
}

pub(crate) fn check_resolution(width: u32, height: u32) -> Result<(), MapError> {
    if width == 0 || height == 0 {
        return Err(MapError::EmptyResolution(width, height));
    }
    if width % 2 != 0 || height % 2 != 0 {
        return Err(MapError::OddResolution(width, height));
    }
    Ok(())
}

/// Center of texel `(i, j)` in `st` units.
pub fn texel_center(i: u32, j: u32, width: u32, height: u32) -> Vec2 {
    vec2(
        (i as f64 + 0.5) / width as f64,
        (j as f64 + 0.5) / height as f64,
    )
}

/// Whether an STMap maps distorted→undistorted coordinates (used for
/// rasterization) or the reverse (used for GUI positioning).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MapKind {
    #[default]
    Distort,
    Undistort,
}

/// Ordered key/value attributes carried with a map (generating parameters,
/// camera information). Written as string attributes by the file layer.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MapMetadata(pub Vec<(String, String)>);

impl MapMetadata {
    pub fn get(&self, key: &str) -> Option<&str> {
        self.0
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        let value = value.to_string();
        if let Some(slot) = self.0.iter_mut().find(|(k, _)| k == key) {
            slot.1 = value;
        } else {
            self.0.push((key.to_string(), value));
        }
    }
}

/// W×H grid of 2-D lookup coordinates with a per-texel validity mask.
/// Texel values are in-bounds when within `[0, 1]`; the mask is zero only
/// where the generating math was undefined (or a target was unreachable,
/// for inverted maps).
#[derive(Debug, Clone, PartialEq)]
pub struct STMap {
    width: u32,
    height: u32,
    texels: Vec<[f32; 2]>,
    mask: Vec<f32>,
    pub kind: MapKind,
    pub metadata: MapMetadata,
}

impl STMap {
    pub fn new(width: u32, height: u32, kind: MapKind) -> Result<STMap, MapError> {
        check_resolution(width, height)?;
        let n = (width * height) as usize;
        Ok(STMap {
            width,
            height,
            texels: vec![[0.0; 2]; n],
            mask: vec![1.0; n],
            kind,
            metadata: MapMetadata::default(),
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn aspect(&self) -> f64 {
        self.width as f64 / self.height as f64
    }

    fn index(&self, x: u32, y: u32) -> usize {
        debug_assert!(x < self.width && y < self.height);
        (y * self.width + x) as usize
    }

    pub fn get(&self, x: u32, y: u32) -> Vec2 {
        let t = self.texels[self.index(x, y)];
        vec2(t[0] as f64, t[1] as f64)
    }

    pub fn set(&mut self, x: u32, y: u32, value: Vec2) {
        let i = self.index(x, y);
        self.texels[i] = [value.x as f32, value.y as f32];
    }

    pub fn mask_at(&self, x: u32, y: u32) -> f32 {
        self.mask[self.index(x, y)]
    }

    pub fn is_valid(&self, x: u32, y: u32) -> bool {
        self.mask[self.index(x, y)] > 0.5
    }

    pub fn set_mask(&mut self, x: u32, y: u32, value: f32) {
        let i = self.index(x, y);
        self.mask[i] = value;
    }

    pub fn all_valid(&self) -> bool {
        self.mask.iter().all(|&m| m > 0.5)
    }

    pub fn texels(&self) -> &[[f32; 2]] {
        &self.texels
    }

    pub fn mask(&self) -> &[f32] {
        &self.mask
    }

    /// Bilinear sample at an `st` position (clamp-to-edge). `None` when any
    /// contributing texel is masked out.
    pub fn sample_bilinear(&self, at: Vec2) -> Option<Vec2> {
        let fx = (at.x * self.width as f64 - 0.5)
            .clamp(0.0, self.width as f64 - 1.0);
        let fy = (at.y * self.height as f64 - 0.5)
            .clamp(0.0, self.height as f64 - 1.0);
        let x0 = fx.floor() as u32;
        let y0 = fy.floor() as u32;
        let x1 = (x0 + 1).min(self.width - 1);
        let y1 = (y0 + 1).min(self.height - 1);
        let tx = fx - x0 as f64;
        let ty = fy - y0 as f64;
        for (x, y) in [(x0, y0), (x1, y0), (x0, y1), (x1, y1)] {
            if !self.is_valid(x, y) {
                return None;
            }
        }
        let lerp = |a: Vec2, b: Vec2, t: f64| a * (1.0 - t) + b * t;
        let top = lerp(self.get(x0, y0), self.get(x1, y0), tx);
        let bottom = lerp(self.get(x0, y1), self.get(x1, y1), tx);
        Some(lerp(top, bottom, ty))
    }
}

/// W×H grid of unit view-sphere direction vectors, with optional vignette
/// channel and a validity mask.
#[derive(Debug, Clone, PartialEq)]
pub struct PerspectiveMap {
    width: u32,
    height: u32,
    dirs: Vec<[f32; 3]>,
    vignette: Option<Vec<f32>>,
    mask: Vec<f32>,
    pub metadata: MapMetadata,
}

impl PerspectiveMap {
    pub fn new(width: u32, height: u32, with_vignette: bool) -> Result<PerspectiveMap, MapError> {
        check_resolution(width, height)?;
        let n = (width * height) as usize;
        Ok(PerspectiveMap {
            width,
            height,
            dirs: vec![[0.0, 0.0, 1.0]; n],
            vignette: with_vignette.then(|| vec![1.0; n]),
            mask: vec![1.0; n],
            metadata: MapMetadata::default(),
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn aspect(&self) -> f64 {
        self.width as f64 / self.height as f64
    }

    fn index(&self, x: u32, y: u32) -> usize {
        debug_assert!(x < self.width && y < self.height);
        (y * self.width + x) as usize
    }

    pub fn get(&self, x: u32, y: u32) -> Vec3 {
        let d = self.dirs[self.index(x, y)];
        vec3(d[0] as f64, d[1] as f64, d[2] as f64)
    }

    pub fn set(&mut self, x: u32, y: u32, dir: Vec3) {
        let i = self.index(x, y);
        self.dirs[i] = [dir.x as f32, dir.y as f32, dir.z as f32];
    }

    pub fn mask_at(&self, x: u32, y: u32) -> f32 {
        self.mask[self.index(x, y)]
    }

    pub fn is_valid(&self, x: u32, y: u32) -> bool {
        self.mask[self.index(x, y)] > 0.5
    }

    pub fn set_mask(&mut self, x: u32, y: u32, value: f32) {
        let i = self.index(x, y);
        self.mask[i] = value;
    }

    pub fn all_valid(&self) -> bool {
        self.mask.iter().all(|&m| m > 0.5)
    }

    pub fn vignette_at(&self, x: u32, y: u32) -> Option<f32> {
        self.vignette.as_ref().map(|v| v[self.index(x, y)])
    }

    pub fn set_vignette(&mut self, x: u32, y: u32, value: f32) {
        let i = self.index(x, y);
        if let Some(v) = self.vignette.as_mut() {
            v[i] = value;
        }
    }

    pub fn has_vignette(&self) -> bool {
        self.vignette.is_some()
    }

    pub fn dirs(&self) -> &[[f32; 3]] {
        &self.dirs
    }

    pub fn mask(&self) -> &[f32] {
        &self.mask
    }

    pub fn vignette(&self) -> Option<&[f32]> {
        self.vignette.as_deref()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn odd_resolution_rejected() {
        assert_eq!(
            STMap::new(63, 64, MapKind::Distort),
            Err(MapError::OddResolution(63, 64))
        );
        assert_eq!(
            PerspectiveMap::new(64, 63, false),
            Err(MapError::OddResolution(64, 63))
        );
    }

    #[test]
    fn texel_centers_straddle_the_middle() {
        // Even resolution: no texel center ever equals 0.5.
        let c = texel_center(31, 32, 64, 64);
        assert!((c.x - 31.5 / 64.0).abs() < 1e-15);
        assert!(c.x != 0.5 && c.y != 0.5);
    }

    #[test]
    fn bilinear_sampling_identity_patch() {
        let mut m = STMap::new(4, 4, MapKind::Distort).unwrap();
        for y in 0..4 {
            for x in 0..4 {
                m.set(x, y, texel_center(x, y, 4, 4));
            }
        }
        let v = m.sample_bilinear(vec2(0.4, 0.6)).unwrap();
        assert!((v.x - 0.4).abs() < 1e-7);
        assert!((v.y - 0.6).abs() < 1e-7);
    }

    #[test]
    fn bilinear_sampling_rejects_masked_taps() {
        let mut m = STMap::new(4, 4, MapKind::Distort).unwrap();
        m.set_mask(1, 1, 0.0);
        assert_eq!(m.sample_bilinear(vec2(0.4, 0.4)), None);
        assert!(m.sample_bilinear(vec2(0.9, 0.9)).is_some());
    }

    #[test]
    fn metadata_set_get_overwrites() {
        let mut md = MapMetadata::default();
        md.set("k", 1.0);
        md.set("k", 0.5);
        assert_eq!(md.get("k"), Some("0.5"));
        assert_eq!(md.get("missing"), None);
    }
}
