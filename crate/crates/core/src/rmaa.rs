//! Rectilinear rasterization with analytic edge anti-aliasing.
//!
//! The pixel-step function replaces the hard edge test with a gradient-
//! normalized ramp that crosses 0.5 exactly on the edge. For the rectilinear
//! path the per-pixel gradient is constant, so normalizing the edge-matrix
//! rows bakes a slope of one pixel into the matrix and no screen-space
//! derivatives are needed.

use crate::geometry::{
    coverage, edge_matrix, edge_weights, normalize_edge_matrix, perspective_correct,
    BarycentricTriple, GeometryError, HalfSpaceTriple, Triangle2, VertexData,
};
use crate::math::{vec2, Vec2};
use rayon::prelude::*;

/// Edge-slope estimator selecting the anti-aliased blur width.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StepVariant {
    /// I: gradient length, `sqrt(ddx² + ddy²)`.
    #[default]
    Length,
    /// II: `|ddx| + |ddy|`, the `fwidth` approximation.
    Fwidth,
    /// III: twice the gradient length.
    TwiceLength,
}

/// Edge gradient value with its per-pixel partial derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradientSample {
    pub value: f64,
    pub ddx: f64,
    pub ddy: f64,
}

/// Slope magnitude of the selected variant.
pub fn step_slope(ddx: f64, ddy: f64, variant: StepVariant) -> f64 {
    let len = (ddx * ddx + ddy * ddy).sqrt();
    match variant {
        StepVariant::Length => len,
        StepVariant::Fwidth => ddx.abs() + ddy.abs(),
        StepVariant::TwiceLength => 2.0 * len,
    }
}

/// Pixel-step function: `clamp(Γ/slope + ½, 0, 1)`. A vanishing slope
/// degenerates to the hard step.
pub fn pix_step(g: GradientSample, variant: StepVariant) -> f64 {
    let slope = step_slope(g.ddx, g.ddy, variant);
    if slope < crate::geometry::DEGENERACY_EPSILON {
        return if g.value < 0.0 { 0.0 } else { 1.0 };
    }
    (g.value / slope + 0.5).clamp(0.0, 1.0)
}

/// Inclusive pixel-index bounding box, clamped to the framebuffer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundingBox {
    pub min: [i64; 2],
    pub max: [i64; 2],
}

/// Vertex bounding box expanded by half a pixel per direction to cover the
/// anti-aliased blur, then clamped to `extent`. `None` when the triangle is
/// fully off-screen.
///
/// The min side takes the smallest index whose center `i+½` can still see
/// blur (`i+½ > min−½`, i.e. `⌊min−1⌋+1`). A plain `⌈min−½⌉` reads the
/// index grid as if centers sat on integers and drops a row of up-to-half
/// coverage whenever the vertex fraction exceeds one half, which would
/// break coverage conservation across shared edges.
pub fn bounding_box_expanded(a: Vec2, b: Vec2, c: Vec2, extent: [u32; 2]) -> Option<BoundingBox> {
    let lo = a.min(b).min(c);
    let hi = a.max(b).max(c);
    let min = [
        (((lo.x - 1.0).floor() as i64) + 1).max(0),
        (((lo.y - 1.0).floor() as i64) + 1).max(0),
    ];
    let max = [
        ((hi.x + 0.5).floor() as i64).min(extent[0] as i64 - 1),
        ((hi.y + 0.5).floor() as i64).min(extent[1] as i64 - 1),
    ];
    if min[0] > max[0] || min[1] > max[1] {
        return None;
    }
    Some(BoundingBox { min, max })
}

/// A covered pixel emitted by a rasterizer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fragment {
    pub pixel: [u32; 2],
    /// Fractional coverage Λ ∈ [0, 1].
    pub coverage: f64,
    /// Interpolated depth (rectilinear/STMap paths) or eye distance
    /// (perspective-map path).
    pub depth: f64,
    /// Perspective-correct barycentric triple λ′.
    pub bary: [f64; 3],
    /// Payload interpolated with λ′.
    pub data: VertexData,
}

/// Rasterizer switches shared by all paths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RasterOptions {
    pub variant: StepVariant,
    /// When false, coverage is the classic binary sign test (ties covered).
    pub anti_alias: bool,
}

impl Default for RasterOptions {
    fn default() -> Self {
        RasterOptions { variant: StepVariant::Length, anti_alias: true }
    }
}

/// Rasterizes a projected triangle over pixel centers `(i+½, j+½)` inside
/// the expanded bounding box. Fragments with zero coverage are not emitted;
/// the fragment stream is ordered row-major.
///
/// Evaluation happens relative to the bounding-box corner, which keeps the
/// coverage field exactly translation-equivariant for integer offsets.
pub fn rasterize_rectilinear(
    tri: &Triangle2,
    extent: [u32; 2],
    opts: &RasterOptions,
) -> Result<Vec<Fragment>, GeometryError> {
    let [a, b, c] = tri.positions;
    let Some(bbox) = bounding_box_expanded(a, b, c, extent) else {
        return Ok(Vec::new());
    };
    let origin = vec2(bbox.min[0] as f64, bbox.min[1] as f64);
    let (la, lb, lc) = (a - origin, b - origin, c - origin);

    let chi = edge_matrix(la, lb, lc)?;
    let chi_n = normalize_edge_matrix(&chi)?;
    let weights = edge_weights(&chi_n, la, lb, lc)?;

    let rows: Vec<Vec<Fragment>> = (bbox.min[1]..=bbox.max[1])
        .into_par_iter()
        .map(|j| {
            let mut row = Vec::new();
            for i in bbox.min[0]..=bbox.max[0] {
                let f = vec2((i - bbox.min[0]) as f64 + 0.5, (j - bbox.min[1]) as f64 + 0.5);
                let e = chi_n.eval(f);
                let lambda = BarycentricTriple::linear([
                    (e[0] - 0.5) * weights.0[0],
                    (e[1] - 0.5) * weights.0[1],
                    (e[2] - 0.5) * weights.0[2],
                ]);
                let cov = if opts.anti_alias {
                    coverage(HalfSpaceTriple([
                        e[0].clamp(0.0, 1.0),
                        e[1].clamp(0.0, 1.0),
                        e[2].clamp(0.0, 1.0),
                    ]))
                } else {
                    let raw = chi.eval(f);
                    if raw[0] >= 0.0 && raw[1] >= 0.0 && raw[2] >= 0.0 {
                        1.0
                    } else {
                        0.0
                    }
                };
                if cov <= 0.0 {
                    continue;
                }
                let Ok((depth, corrected)) = perspective_correct(&lambda, tri.inv_depth) else {
                    continue;
                };
                row.push(Fragment {
                    pixel: [i as u32, j as u32],
                    coverage: cov,
                    depth,
                    bary: corrected.values,
                    data: VertexData::interpolate(&tri.vertex_data, corrected.values),
                });
            }
            row
        })
        .collect();

    Ok(rows.into_iter().flatten().collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tri(positions: [Vec2; 3]) -> Triangle2 {
        Triangle2 {
            positions,
            inv_depth: [1.0; 3],
            vertex_data: [VertexData::default(); 3],
        }
    }

    #[test]
    fn pix_step_on_edge_is_half() {
        let v = pix_step(GradientSample { value: 0.0, ddx: 1.0, ddy: 0.0 }, StepVariant::Length);
        assert_eq!(v, 0.5);
    }

    #[test]
    fn pix_step_linear_ramp() {
        let v = pix_step(GradientSample { value: 0.25, ddx: 1.0, ddy: 0.0 }, StepVariant::Length);
        assert_eq!(v, 0.75);
    }

    #[test]
    fn pix_step_fwidth_clamps() {
        let v = pix_step(GradientSample { value: 1.0, ddx: 1.0, ddy: 1.0 }, StepVariant::Fwidth);
        assert_eq!(v, 1.0);
    }

    #[test]
    fn pix_step_zero_slope_is_hard_step() {
        let lo = pix_step(GradientSample { value: -0.1, ddx: 0.0, ddy: 0.0 }, StepVariant::Length);
        let hi = pix_step(GradientSample { value: 0.1, ddx: 0.0, ddy: 0.0 }, StepVariant::Length);
        assert_eq!((lo, hi), (0.0, 1.0));
    }

    #[test]
    fn bbox_expansion() {
        let bb = bounding_box_expanded(
            vec2(0.3, 0.3),
            vec2(2.6, 0.4),
            vec2(1.0, 3.1),
            [64, 64],
        )
        .unwrap();
        assert_eq!(bb.min, [0, 0]);
        assert_eq!(bb.max, [3, 3]);
    }

    #[test]
    fn bbox_integer_vertices() {
        let bb = bounding_box_expanded(
            vec2(1.0, 1.0),
            vec2(4.0, 1.0),
            vec2(1.0, 4.0),
            [64, 64],
        )
        .unwrap();
        assert_eq!(bb.min, [1, 1]);
        assert_eq!(bb.max, [4, 4]);
    }

    #[test]
    fn bbox_offscreen_is_none() {
        let bb = bounding_box_expanded(
            vec2(-10.0, 3.0),
            vec2(-5.0, 3.0),
            vec2(-5.0, 8.0),
            [64, 64],
        );
        assert_eq!(bb, None);
    }

    #[test]
    fn interior_pixel_full_coverage_uniform_depth() {
        // Unit-right triangle scaled to 64 px.
        let t = tri([vec2(0.0, 0.0), vec2(64.0, 0.0), vec2(0.0, 64.0)]);
        let frags = rasterize_rectilinear(&t, [64, 64], &RasterOptions::default()).unwrap();
        let centroid = [64.0 / 3.0, 64.0 / 3.0];
        let px = [centroid[0] as u32, centroid[1] as u32];
        let f = frags.iter().find(|f| f.pixel == px).unwrap();
        assert_eq!(f.coverage, 1.0);
        for v in f.bary {
            assert!((v - 1.0 / 3.0).abs() < 0.05);
        }
        assert!((f.depth - 1.0).abs() < 1e-12);
    }

    #[test]
    fn on_edge_pixel_half_coverage() {
        // Bottom edge runs along y = 10.5, exactly through centers of row 10.
        let t = tri([vec2(2.0, 10.5), vec2(30.0, 10.5), vec2(16.0, 40.0)]);
        let frags = rasterize_rectilinear(&t, [64, 64], &RasterOptions::default()).unwrap();
        let f = frags.iter().find(|f| f.pixel == [16, 10]).unwrap();
        assert!((f.coverage - 0.5).abs() < 1e-12);
    }

    #[test]
    fn degenerate_triangle_reported() {
        let t = tri([vec2(0.0, 0.0), vec2(5.0, 5.0), vec2(10.0, 10.0)]);
        let r = rasterize_rectilinear(&t, [64, 64], &RasterOptions::default());
        assert_eq!(r, Err(GeometryError::DegenerateTriangle));
    }

    #[test]
    fn aa_off_is_binary_sign_test() {
        let t = tri([vec2(1.2, 1.2), vec2(20.7, 2.1), vec2(3.4, 22.9)]);
        let opts = RasterOptions { anti_alias: false, ..Default::default() };
        let frags = rasterize_rectilinear(&t, [64, 64], &opts).unwrap();
        assert!(!frags.is_empty());
        let chi = edge_matrix(t.positions[0], t.positions[1], t.positions[2]).unwrap();
        for f in &frags {
            assert_eq!(f.coverage, 1.0);
            let e = chi.eval(vec2(f.pixel[0] as f64 + 0.5, f.pixel[1] as f64 + 0.5));
            assert!(e.iter().all(|&v| v >= 0.0));
        }
    }

    #[test]
    fn backface_emits_nothing() {
        // Clockwise winding: negative area, never covered.
        let t = tri([vec2(0.0, 0.0), vec2(0.0, 30.0), vec2(30.0, 0.0)]);
        let frags = rasterize_rectilinear(&t, [64, 64], &RasterOptions::default()).unwrap();
        assert!(frags.is_empty());
    }
}
