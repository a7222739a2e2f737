//! Lens-distortion STMap generation.
//!
//! A division-model variant of the Brown–Conrady lens model with
//! angle-of-view preservation: the radial series is normalized so the
//! `r = 1` circle (the AOV-normalized frame axis) stays fixed for any
//! coefficient set.

use crate::maps::{texel_center, MapError, MapKind, STMap};
use crate::math::{vec2, Vec2};
use rayon::prelude::*;

use super::{mapping_vector, universal_view_coord, FovAxis, MappingVector};

/// Lens distortion coefficients. Suggested ranges (a warning, not a
/// rejection): radial within ±0.4, thin prism ±0.2, decentering ±0.1,
/// cardinal offset ±0.2.
#[derive(Debug, Clone, PartialEq)]
pub struct LensParams {
    /// Radial coefficients k₁..k_n; the series order is the vector length.
    pub radial: Vec<f64>,
    /// Thin-prism coefficients p₁, p₂.
    pub thin_prism: [f64; 2],
    /// Decentering coefficients q₁, q₂.
    pub decentering: [f64; 2],
    /// Cardinal (optical center) offset c₁, c₂.
    pub cardinal: [f64; 2],
    pub fov_axis: FovAxis,
}

impl Default for LensParams {
    fn default() -> Self {
        LensParams {
            radial: vec![0.0, 0.0],
            thin_prism: [0.0; 2],
            decentering: [0.0; 2],
            cardinal: [0.0; 2],
            fov_axis: FovAxis::Diagonal,
        }
    }
}

impl LensParams {
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut check = |name: &str, value: f64, limit: f64| {
            if value.abs() > limit {
                out.push(format!(
                    "{name}={value} outside suggested range [-{limit}, {limit}]"
                ));
            }
        };
        for (i, &k) in self.radial.iter().enumerate() {
            check(&format!("k{}", i + 1), k, 0.4);
        }
        for (i, &p) in self.thin_prism.iter().enumerate() {
            check(&format!("p{}", i + 1), p, 0.2);
        }
        for (i, &q) in self.decentering.iter().enumerate() {
            check(&format!("q{}", i + 1), q, 0.1);
        }
        for (i, &c) in self.cardinal.iter().enumerate() {
            check(&format!("c{}", i + 1), c, 0.2);
        }
        out
    }
}

/// Bounds-normalized radial division factor `(1 + Σkᵢ) / (1 + Σkᵢ·r^(2i))`.
/// Both sums use the same accumulation order, so the factor is exactly one
/// at `r = 1`. `None` when the denominator vanishes.
fn radial_factor(r2: f64, radial: &[f64]) -> Option<f64> {
    let mut num = 1.0;
    let mut den = 1.0;
    let mut power = r2;
    for &k in radial {
        num += k;
        den += k * power;
        power *= r2;
    }
    if den.abs() < crate::geometry::DEGENERACY_EPSILON {
        return None;
    }
    Some(num / den)
}

/// Per-coordinate lens distortion chain: cardinal offset, decentering,
/// thin prism, normalized radial division, cardinal restore. `None` when
/// the radial denominator collapses.
pub fn lens_distort_coord(st: Vec2, p: &LensParams, u: MappingVector) -> Option<Vec2> {
    let view = universal_view_coord(st, u);
    let f = vec2(view.x - p.cardinal[0], view.y - p.cardinal[1]);
    let r2 = f.dot(f);
    // Decentering shifts by r² along the q vector.
    let f1 = vec2(f.x + r2 * p.decentering[0], f.y + r2 * p.decentering[1]);
    // Thin prism scales by one plus the projection onto p.
    let prism = 1.0 + (p.thin_prism[0] * f1.x + p.thin_prism[1] * f1.y);
    let f2 = f1 * prism;
    let f3 = f2 * radial_factor(r2, &p.radial)?;
    let g = vec2(f3.x + p.cardinal[0], f3.y + p.cardinal[1]);
    Some(vec2(g.x / (2.0 * u.s) + 0.5, g.y / (2.0 * u.t) + 0.5))
}

/// Generates a distorting lens STMap with the chosen AOV normalization.
pub fn lens_distort_stmap(p: &LensParams, width: u32, height: u32) -> Result<STMap, MapError> {
    let mut map = STMap::new(width, height, MapKind::Distort)?;
    let u = mapping_vector(map.aspect(), p.fov_axis);
    let rows: Vec<Vec<(Vec2, f32)>> = (0..height)
        .into_par_iter()
        .map(|y| {
            (0..width)
                .map(|x| {
                    match lens_distort_coord(texel_center(x, y, width, height), p, u) {
                        Some(v) => (v, 1.0),
                        None => (Vec2::ZERO, 0.0),
                    }
                })
                .collect()
        })
        .collect();
    for (y, row) in rows.into_iter().enumerate() {
        for (x, (value, mask)) in row.into_iter().enumerate() {
            map.set(x as u32, y as u32, value);
            map.set_mask(x as u32, y as u32, mask);
        }
    }
    map.metadata.set("fovAxis", p.fov_axis.symbol());
    for (i, &k) in p.radial.iter().enumerate() {
        map.metadata.set(&format!("lens.k{}", i + 1), k);
    }
    map.metadata.set("lens.p1", p.thin_prism[0]);
    map.metadata.set("lens.p2", p.thin_prism[1]);
    map.metadata.set("lens.q1", p.decentering[0]);
    map.metadata.set("lens.q2", p.decentering[1]);
    map.metadata.set("lens.c1", p.cardinal[0]);
    map.metadata.set("lens.c2", p.cardinal[1]);
    Ok(map)
}
