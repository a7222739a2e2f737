//! Rectilinear RMAA rasterization properties: conservation across shared
//! edges, interior saturation, exact translation equivariance, binary-mode
//! semantics and blur-width ordering of the step variants.

mod common;

use common::CoverageField;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rastermap::geometry::{Triangle2, VertexData};
use rastermap::math::{vec2, Vec2};
use rastermap::rmaa::{
    pix_step, rasterize_rectilinear, step_slope, GradientSample, RasterOptions, StepVariant,
};

fn tri(positions: [Vec2; 3]) -> Triangle2 {
    Triangle2 {
        positions,
        inv_depth: [1.0; 3],
        vertex_data: [VertexData::default(); 3],
    }
}

fn point_segment_distance(p: Vec2, a: Vec2, b: Vec2) -> (f64, f64) {
    let ab = b - a;
    let t = ((p - a).dot(ab) / ab.dot(ab)).clamp(0.0, 1.0);
    let closest = a + ab * t;
    ((p - closest).length(), t)
}

#[test]
fn shared_edge_coverage_conserves() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xed6e);
    let extent = [96u32, 96u32];
    for _ in 0..20 {
        // Convex quad split along its diagonal; both triangles front-facing.
        let center = vec2(rng.gen_range(30.0..60.0), rng.gen_range(30.0..60.0));
        let mut corners: Vec<Vec2> = Vec::new();
        for i in 0..4 {
            let angle = std::f64::consts::FRAC_PI_2 * i as f64
                + rng.gen_range(0.1..std::f64::consts::FRAC_PI_2 - 0.1);
            let radius = rng.gen_range(18.0..28.0);
            corners.push(center + vec2(angle.cos(), angle.sin()) * radius);
        }
        let (a, b, c, d) = (corners[0], corners[1], corners[2], corners[3]);
        let t1 = tri([a, b, c]);
        let t2 = tri([a, c, d]);

        let f1 = CoverageField::from_fragments(
            extent[0],
            extent[1],
            &rasterize_rectilinear(&t1, extent, &RasterOptions::default()).unwrap(),
        );
        let f2 = CoverageField::from_fragments(
            extent[0],
            extent[1],
            &rasterize_rectilinear(&t2, extent, &RasterOptions::default()).unwrap(),
        );

        let others = [(a, b), (b, c), (a, d), (d, c)];
        let mut checked = 0;
        for y in 0..extent[1] {
            for x in 0..extent[0] {
                let p = vec2(x as f64 + 0.5, y as f64 + 0.5);
                let (dist, t) = point_segment_distance(p, a, c);
                if dist > 0.5 || !(0.05..=0.95).contains(&t) {
                    continue;
                }
                if others
                    .iter()
                    .any(|&(u, v)| point_segment_distance(p, u, v).0 <= 1.0)
                {
                    continue;
                }
                let sum = f1.coverage_at(x, y) + f2.coverage_at(x, y);
                assert!(
                    (sum - 1.0).abs() <= 1e-6,
                    "Λ1+Λ2 = {sum} at ({x},{y})"
                );
                checked += 1;
            }
        }
        assert!(checked > 10, "edge band too small: {checked} pixels");
    }
}

#[test]
fn interior_pixels_saturate_exactly() {
    let t = tri([vec2(5.2, 4.9), vec2(60.7, 10.3), vec2(30.1, 55.8)]);
    let frags = rasterize_rectilinear(&t, [64, 64], &RasterOptions::default()).unwrap();
    let chi = rastermap::geometry::edge_matrix(t.positions[0], t.positions[1], t.positions[2])
        .unwrap();
    let norm = rastermap::geometry::normalize_edge_matrix(&chi).unwrap();
    let mut interior = 0;
    for f in &frags {
        let p = vec2(f.pixel[0] as f64 + 0.5, f.pixel[1] as f64 + 0.5);
        let e = norm.eval(p);
        // More than one pixel inside every edge (row value is signed
        // distance plus one half).
        if e.iter().all(|&v| v >= 1.5) {
            assert_eq!(f.coverage, 1.0, "pixel {:?}", f.pixel);
            interior += 1;
        }
    }
    assert!(interior > 100);
}

#[test]
fn translation_by_integer_pixels_is_bit_identical() {
    // Dyadic coordinates stay exact under integer translation, so the
    // local-origin evaluation must reproduce coverage bit for bit.
    let mut rng = ChaCha8Rng::seed_from_u64(0x7a15);
    for _ in 0..50 {
        let mut quantized = [Vec2::ZERO; 3];
        for v in &mut quantized {
            *v = vec2(
                rng.gen_range(0..20 * 1024) as f64 / 1024.0,
                rng.gen_range(0..20 * 1024) as f64 / 1024.0,
            );
        }
        let area2 = (quantized[1] - quantized[0]).x * (quantized[2] - quantized[0]).y
            - (quantized[1] - quantized[0]).y * (quantized[2] - quantized[0]).x;
        if area2.abs() < 1.0 {
            continue;
        }
        let base = if area2 > 0.0 {
            quantized
        } else {
            [quantized[0], quantized[2], quantized[1]]
        };
        let (dx, dy) = (rng.gen_range(1..30) as f64, rng.gen_range(1..30) as f64);
        let moved = base.map(|v| v + vec2(dx, dy));

        let fa = rasterize_rectilinear(&tri(base), [64, 64], &RasterOptions::default()).unwrap();
        let fb = rasterize_rectilinear(&tri(moved), [64, 64], &RasterOptions::default()).unwrap();

        let in_frame = |f: &rastermap::rmaa::Fragment| {
            f.pixel[0] as i64 + (dx as i64) < 64 && f.pixel[1] as i64 + (dy as i64) < 64
        };
        let fa: Vec<_> = fa.iter().filter(|f| in_frame(f)).collect();
        assert_eq!(fa.len(), fb.len());
        for (xa, xb) in fa.iter().zip(&fb) {
            assert_eq!(xa.pixel[0] as i64 + dx as i64, xb.pixel[0] as i64);
            assert_eq!(xa.pixel[1] as i64 + dy as i64, xb.pixel[1] as i64);
            assert_eq!(xa.coverage.to_bits(), xb.coverage.to_bits(), "coverage drifted");
        }
    }
}

#[test]
fn aa_off_equals_classic_sign_test() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x0ff);
    let opts = RasterOptions { anti_alias: false, ..Default::default() };
    for _ in 0..20 {
        let positions = common::random_ccw_triangle(&mut rng, 2.0, 62.0, 4.0);
        let t = tri(positions);
        let frags = rasterize_rectilinear(&t, [64, 64], &opts).unwrap();
        let chi =
            rastermap::geometry::edge_matrix(positions[0], positions[1], positions[2]).unwrap();
        let mut expected = Vec::new();
        for y in 0..64u32 {
            for x in 0..64u32 {
                let e = chi.eval(vec2(x as f64 + 0.5, y as f64 + 0.5));
                if e.iter().all(|&v| v >= 0.0) {
                    expected.push([x, y]);
                }
            }
        }
        let got: Vec<[u32; 2]> = frags.iter().map(|f| f.pixel).collect();
        assert_eq!(got, expected);
        assert!(frags.iter().all(|f| f.coverage == 1.0));
    }
}

#[test]
fn variant_blur_widths_are_ordered() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xb1e5);
    for _ in 0..500 {
        let (ddx, ddy): (f64, f64) = (rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
        if ddx.abs() + ddy.abs() < 1e-6 {
            continue;
        }
        let w1 = step_slope(ddx, ddy, StepVariant::Length);
        let w2 = step_slope(ddx, ddy, StepVariant::Fwidth);
        let w3 = step_slope(ddx, ddy, StepVariant::TwiceLength);
        assert!(w1 <= w2 + 1e-12 && w2 <= w3 + 1e-12, "{w1} {w2} {w3}");

        // Wider slope means a value closer to ½ for the same positive Γ.
        let gamma = rng.gen_range(0.01..2.0);
        let s1 = pix_step(GradientSample { value: gamma, ddx, ddy }, StepVariant::Length);
        let s2 = pix_step(GradientSample { value: gamma, ddx, ddy }, StepVariant::Fwidth);
        let s3 = pix_step(GradientSample { value: gamma, ddx, ddy }, StepVariant::TwiceLength);
        assert!(s1 >= s2 - 1e-12 && s2 >= s3 - 1e-12);
    }
}

#[test]
fn half_plane_matches_supersampling_oracle() {
    let extent = [64u32, 64u32];
    let center = vec2(32.0, 32.0);
    for angle_deg in [0.0, 15.0, 30.0, 45.0] {
        let angle = (angle_deg as f64).to_radians();
        let t = tri(common::half_plane_triangle(center, angle));
        let frags = rasterize_rectilinear(&t, extent, &RasterOptions::default()).unwrap();
        let field = CoverageField::from_fragments(extent[0], extent[1], &frags);
        let inside = common::half_plane(center, angle);

        let mut sum = 0.0;
        let mut max: f64 = 0.0;
        for y in 0..extent[1] {
            for x in 0..extent[0] {
                let oracle = common::supersampled_coverage(x, y, &inside);
                let d = (field.coverage_at(x, y) - oracle).abs();
                sum += d;
                max = max.max(d);
            }
        }
        let mean = sum / (extent[0] * extent[1]) as f64;
        assert!(mean <= 0.03, "angle {angle_deg}: mean {mean}");
        assert!(max <= 0.15, "angle {angle_deg}: max {max}");
    }
}
