//! Shared test oracles: supersampled box-filter coverage, ray–plane
//! interpolation references, seeded random geometry and coverage-field
//! helpers. Everything here is independent of the rasterizer internals it
//! checks.

#![allow(dead_code)]

use rand::Rng;
use rastermap::geometry::{Triangle2, VertexData};
use rastermap::math::{vec2, vec3, Vec2, Vec3};
use rastermap::rmaa::Fragment;

/// 256× supersampled box-filter coverage of an arbitrary inside predicate,
/// for pixel `(i, j)` with unit pixels and centers at half-integers.
pub fn supersampled_coverage(i: u32, j: u32, inside: &dyn Fn(Vec2) -> bool) -> f64 {
    const N: u32 = 16;
    let mut hits = 0u32;
    for sy in 0..N {
        for sx in 0..N {
            let p = vec2(
                i as f64 + (sx as f64 + 0.5) / N as f64,
                j as f64 + (sy as f64 + 0.5) / N as f64,
            );
            if inside(p) {
                hits += 1;
            }
        }
    }
    hits as f64 / (N * N) as f64
}

/// Half plane with inward normal at `angle` passing through `center`.
pub fn half_plane(center: Vec2, angle: f64) -> impl Fn(Vec2) -> bool {
    let normal = vec2(angle.cos(), angle.sin());
    move |p: Vec2| (p - center).dot(normal) >= 0.0
}

/// A triangle so large that only its base edge (the boundary of the half
/// plane) intersects the frame.
pub fn half_plane_triangle(center: Vec2, angle: f64) -> [Vec2; 3] {
    let normal = vec2(angle.cos(), angle.sin());
    let tangent = vec2(-normal.y, normal.x);
    let far = 4000.0;
    [
        center + tangent * far,
        center - tangent * far,
        center + normal * far,
    ]
}

/// Dense coverage field assembled from a fragment stream.
pub struct CoverageField {
    pub width: u32,
    pub height: u32,
    pub coverage: Vec<f64>,
    pub uv: Vec<[f64; 2]>,
}

impl CoverageField {
    pub fn from_fragments(width: u32, height: u32, fragments: &[Fragment]) -> CoverageField {
        let mut field = CoverageField {
            width,
            height,
            coverage: vec![0.0; (width * height) as usize],
            uv: vec![[f64::NAN; 2]; (width * height) as usize],
        };
        for f in fragments {
            let i = (f.pixel[1] * width + f.pixel[0]) as usize;
            field.coverage[i] = f.coverage;
            field.uv[i] = f.data.uv;
        }
        field
    }

    pub fn coverage_at(&self, x: u32, y: u32) -> f64 {
        self.coverage[(y * self.width + x) as usize]
    }

    pub fn uv_at(&self, x: u32, y: u32) -> [f64; 2] {
        self.uv[(y * self.width + x) as usize]
    }
}

/// Standard attribute set: UVs spanning the unit triangle, distinct colors.
pub fn test_vertex_data() -> [VertexData; 3] {
    [
        VertexData { color: [1.0, 0.0, 0.0, 1.0], uv: [0.0, 0.0] },
        VertexData { color: [0.0, 1.0, 0.0, 1.0], uv: [1.0, 0.0] },
        VertexData { color: [0.0, 0.0, 1.0, 1.0], uv: [0.0, 1.0] },
    ]
}

/// Random front-facing (positive doubled area) triangle in a coordinate box.
pub fn random_ccw_triangle(
    rng: &mut impl Rng,
    lo: f64,
    hi: f64,
    min_area: f64,
) -> [Vec2; 3] {
    loop {
        let mut p = [Vec2::ZERO; 3];
        for v in &mut p {
            *v = vec2(rng.gen_range(lo..hi), rng.gen_range(lo..hi));
        }
        let area2 = (p[1] - p[0]).x * (p[2] - p[0]).y - (p[1] - p[0]).y * (p[2] - p[0]).x;
        if area2.abs() < 2.0 * min_area {
            continue;
        }
        if area2 < 0.0 {
            p.swap(1, 2);
        }
        return p;
    }
}

/// Random view-space triangle inside a 90°-ish frustum, vertices at depth
/// `[z_lo, z_hi]`.
pub fn random_view_triangle(rng: &mut impl Rng, z_lo: f64, z_hi: f64) -> [Vec3; 3] {
    loop {
        let mut p = [Vec3::ZERO; 3];
        for v in &mut p {
            let z = rng.gen_range(z_lo..z_hi);
            *v = vec3(
                rng.gen_range(-0.6..0.6) * z,
                rng.gen_range(-0.6..0.6) * z,
                z,
            );
        }
        // Projected area guard against slivers.
        let q: Vec<Vec2> = p.iter().map(|v| vec2(v.x / v.z, v.y / v.z)).collect();
        let area2 = (q[1] - q[0]).x * (q[2] - q[0]).y - (q[1] - q[0]).y * (q[2] - q[0]).x;
        if area2.abs() > 0.02 {
            return p;
        }
    }
}

/// Interpolates vertex UVs at the ray–plane intersection of the view ray
/// through projection-plane point `p` — the perspective-correct reference.
pub fn raycast_uv(view: &[Vec3; 3], uvs: &[[f64; 2]; 3], p: Vec2) -> Option<[f64; 2]> {
    let dir = vec3(p.x, p.y, 1.0);
    let [a, b, c] = *view;
    let normal = (b - a).cross(c - a);
    let denom = dir.dot(normal);
    if denom.abs() < 1e-15 {
        return None;
    }
    let t = a.dot(normal) / denom;
    let x = dir * t;
    // 3-D barycentric via sub-triangle volumes against the plane normal.
    let n2 = normal.dot(normal);
    let la = (b - x).cross(c - x).dot(normal) / n2;
    let lb = (c - x).cross(a - x).dot(normal) / n2;
    let lc = (a - x).cross(b - x).dot(normal) / n2;
    Some([
        la * uvs[0][0] + lb * uvs[1][0] + lc * uvs[2][0],
        la * uvs[0][1] + lb * uvs[1][1] + lc * uvs[2][1],
    ])
}

/// Projected-space triangle with inverse depths, shaped for the rectilinear
/// rasterizer from a view-space one. Projection plane coordinates are
/// scaled by `scale` into pixel space.
pub fn project_to_pixels(view: &[Vec3; 3], scale: f64, offset: Vec2) -> Triangle2 {
    let mut positions = [Vec2::ZERO; 3];
    let mut inv_depth = [0.0; 3];
    for i in 0..3 {
        positions[i] = vec2(
            view[i].x / view[i].z * scale + offset.x,
            view[i].y / view[i].z * scale + offset.y,
        );
        inv_depth[i] = 1.0 / view[i].z;
    }
    Triangle2 { positions, inv_depth, vertex_data: test_vertex_data() }
}

/// Smallest internal angle of a triangle, in radians.
pub fn min_internal_angle(p: &[Vec2; 3]) -> f64 {
    let mut min = f64::INFINITY;
    for i in 0..3 {
        let u = p[(i + 1) % 3] - p[i];
        let v = p[(i + 2) % 3] - p[i];
        let cos = u.dot(v) / (u.length() * v.length());
        min = min.min(cos.clamp(-1.0, 1.0).acos());
    }
    min
}

/// True when the anti-aliasing blur of a triangle (in pixel coordinates)
/// leaks more than `threshold` coverage outside the half-pixel-expanded
/// bounding box. Acute vertices push blur up to ½/sin(θ/2) pixels past the
/// hull, beyond the box's reach; such triangles make the box-scoped
/// rectilinear rasterizer and the scope-free lookup paths disagree on a few
/// boundary pixels, which is a scoping artifact rather than a coverage-model
/// difference.
pub fn blur_escapes_box_scope(p: &[Vec2; 3], extent: [u32; 2], threshold: f64) -> bool {
    use rastermap::geometry::{edge_matrix, normalize_edge_matrix};
    use rastermap::rmaa::bounding_box_expanded;
    let Some(bb) = bounding_box_expanded(p[0], p[1], p[2], extent) else {
        return true;
    };
    let Ok(chi) = edge_matrix(p[0], p[1], p[2]) else { return true };
    let Ok(norm) = normalize_edge_matrix(&chi) else { return true };
    let ring = 5i64;
    for y in (bb.min[1] - ring).max(0)..=(bb.max[1] + ring).min(extent[1] as i64 - 1) {
        for x in (bb.min[0] - ring).max(0)..=(bb.max[0] + ring).min(extent[0] as i64 - 1) {
            if x >= bb.min[0] && x <= bb.max[0] && y >= bb.min[1] && y <= bb.max[1] {
                continue;
            }
            let e = norm.eval(vec2(x as f64 + 0.5, y as f64 + 0.5));
            let cov: f64 = e.iter().map(|v| v.clamp(0.0, 1.0)).product();
            if cov > threshold {
                return true;
            }
        }
    }
    false
}
