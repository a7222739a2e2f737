//! Conversions between rasterization maps: planar re-projection of a
//! Perspective Map into an STMap, and distort→undistort STMap inversion.

use crate::maps::{texel_center, MapError, MapKind, PerspectiveMap, STMap};
use crate::math::{vec2, Vec2};
use crate::rmaa::{pix_step, GradientSample, StepVariant};
use rayon::prelude::*;
use std::collections::VecDeque;
use std::f64::consts::PI;

use super::{mapping_vector, FovAxis};

/// Newton refinement tolerance for [`invert_stmap`], in `st` units.
pub const INVERT_TOLERANCE: f64 = 1e-5;
/// Newton iteration cap for [`invert_stmap`].
pub const INVERT_MAX_ITERATIONS: usize = 8;

/// Re-projects a Perspective Map onto a planar STMap with the given angle
/// of view. Limited to views below 180°; directions behind the `z_near`
/// plane fade out through the smooth bounds mask.
pub fn perspective_map_to_stmap(
    pm: &PerspectiveMap,
    fov: f64,
    fov_axis: FovAxis,
    z_near: f64,
) -> Result<STMap, MapError> {
    if !(fov > 0.0 && fov < PI) {
        return Err(MapError::FovOutOfRange(
            fov.to_degrees(),
            "in (0°, 180°) for STMap output",
        ));
    }
    if !(z_near > 0.0 && z_near < 1.0) {
        return Err(MapError::InvalidNearClip(z_near));
    }
    let (width, height) = (pm.width(), pm.height());
    let mut map = STMap::new(width, height, MapKind::Distort)?;
    let u = mapping_vector(pm.aspect(), fov_axis);
    let cot = 1.0 / (0.5 * fov).tan();

    // Central differences of G_z, one-sided at borders and mask edges.
    let dz = |x: u32, y: u32| -> (f64, f64) {
        let z = |x: u32, y: u32| pm.get(x, y).z;
        let axis = |lo: Option<(u32, u32)>, hi: Option<(u32, u32)>| -> f64 {
            let lo = lo.filter(|&(x, y)| pm.is_valid(x, y));
            let hi = hi.filter(|&(x, y)| pm.is_valid(x, y));
            match (lo, hi) {
                (Some(a), Some(b)) => (z(b.0, b.1) - z(a.0, a.1)) * 0.5,
                (Some(a), None) => z(x, y) - z(a.0, a.1),
                (None, Some(b)) => z(b.0, b.1) - z(x, y),
                (None, None) => 0.0,
            }
        };
        (
            axis(
                (x > 0).then(|| (x - 1, y)),
                (x + 1 < width).then(|| (x + 1, y)),
            ),
            axis(
                (y > 0).then(|| (x, y - 1)),
                (y + 1 < height).then(|| (x, y + 1)),
            ),
        )
    };

    for y in 0..height {
        for x in 0..width {
            if !pm.is_valid(x, y) {
                map.set_mask(x, y, 0.0);
                continue;
            }
            let g = pm.get(x, y);
            let d = g.z.max(z_near);
            map.set(
                x,
                y,
                vec2(
                    g.x / d * cot / (2.0 * u.s) + 0.5,
                    g.y / d * cot / (2.0 * u.t) + 0.5,
                ),
            );
            let (ddx, ddy) = dz(x, y);
            let m = pix_step(
                GradientSample { value: g.z - z_near, ddx, ddy },
                StepVariant::Length,
            );
            map.set_mask(x, y, m as f32);
        }
    }
    for (key, value) in &pm.metadata.0 {
        map.metadata.set(key, value);
    }
    map.metadata.set("convertedFovAxis", fov_axis.symbol());
    map.metadata.set("convertedFovDegrees", fov.to_degrees());
    map.metadata.set("nearClip", z_near);
    Ok(map)
}

/// Inverts a distorting STMap into an undistorting one (or vice versa).
///
/// Every valid source texel scatters its own coordinate into the target
/// grid, seeds flood-fill outward, and each target texel is then refined by
/// Newton iteration on bilinear samples of the forward map. Texels where no
/// iterate converges are masked: unreachable regions stay masked with the
/// nearest scatter hit (if any) left as a best-effort value.
pub fn invert_stmap(map: &STMap) -> Result<STMap, MapError> {
    let (width, height) = (map.width(), map.height());
    let mut out = STMap::new(
        width,
        height,
        match map.kind {
            MapKind::Distort => MapKind::Undistort,
            MapKind::Undistort => MapKind::Distort,
        },
    )?;

    let idx = |x: u32, y: u32| (y * width + x) as usize;
    // Per-target nearest scatter hit: (source st, squared distance).
    let mut seeds: Vec<Option<(Vec2, f64)>> = vec![None; (width * height) as usize];
    let mut scattered: Vec<bool> = vec![false; seeds.len()];
    for y in 0..height {
        for x in 0..width {
            if !map.is_valid(x, y) {
                continue;
            }
            let v = map.get(x, y);
            if !(0.0..1.0).contains(&v.x) || !(0.0..1.0).contains(&v.y) {
                continue;
            }
            let tx = ((v.x * width as f64) as u32).min(width - 1);
            let ty = ((v.y * height as f64) as u32).min(height - 1);
            let center = texel_center(tx, ty, width, height);
            let d = (v - center).dot(v - center);
            let slot = &mut seeds[idx(tx, ty)];
            if slot.map_or(true, |(_, best)| d < best) {
                *slot = Some((texel_center(x, y, width, height), d));
            }
            scattered[idx(tx, ty)] = true;
        }
    }

    // Flood seeds into empty texels so Newton has a starting guess
    // everywhere connected to a hit.
    let mut queue: VecDeque<(u32, u32)> = VecDeque::new();
    for y in 0..height {
        for x in 0..width {
            if seeds[idx(x, y)].is_some() {
                queue.push_back((x, y));
            }
        }
    }
    while let Some((x, y)) = queue.pop_front() {
        let seed = seeds[idx(x, y)].expect("queued texel has a seed");
        let mut visit = |nx: u32, ny: u32, queue: &mut VecDeque<(u32, u32)>| {
            if seeds[idx(nx, ny)].is_none() {
                seeds[idx(nx, ny)] = Some(seed);
                queue.push_back((nx, ny));
            }
        };
        if x > 0 {
            visit(x - 1, y, &mut queue);
        }
        if x + 1 < width {
            visit(x + 1, y, &mut queue);
        }
        if y > 0 {
            visit(x, y - 1, &mut queue);
        }
        if y + 1 < height {
            visit(x, y + 1, &mut queue);
        }
    }

    let refined: Vec<Vec<(Vec2, f32)>> = (0..height)
        .into_par_iter()
        .map(|y| {
            (0..width)
                .map(|x| {
                    let i = idx(x, y);
                    let Some((seed, _)) = seeds[i] else {
                        return (Vec2::ZERO, 0.0);
                    };
                    let target = texel_center(x, y, width, height);
                    match newton_refine(map, seed, target) {
                        Some(st) => (st, 1.0),
                        // Not converged: non-injective or unreachable.
                        None if scattered[i] => (seed, 0.0),
                        None => (Vec2::ZERO, 0.0),
                    }
                })
                .collect()
        })
        .collect();
    for (y, row) in refined.into_iter().enumerate() {
        for (x, (value, mask)) in row.into_iter().enumerate() {
            out.set(x as u32, y as u32, value);
            out.set_mask(x as u32, y as u32, mask);
        }
    }
    for (key, value) in &map.metadata.0 {
        out.metadata.set(key, value);
    }
    Ok(out)
}

/// Newton iteration solving `forward(st) = target` on bilinear samples.
fn newton_refine(map: &STMap, seed: Vec2, target: Vec2) -> Option<Vec2> {
    let h = 0.5 / map.width().max(map.height()) as f64;
    let mut st = seed;
    for _ in 0..INVERT_MAX_ITERATIONS {
        let value = map.sample_bilinear(st)?;
        let residual = value - target;
        if residual.length() <= INVERT_TOLERANCE {
            return Some(st);
        }
        let dx = (map.sample_bilinear(st + vec2(h, 0.0))?
            - map.sample_bilinear(st - vec2(h, 0.0))?)
            / (2.0 * h);
        let dy = (map.sample_bilinear(st + vec2(0.0, h))?
            - map.sample_bilinear(st - vec2(0.0, h))?)
            / (2.0 * h);
        let det = dx.x * dy.y - dy.x * dx.y;
        if det.abs() < crate::geometry::DEGENERACY_EPSILON {
            return None;
        }
        let step = vec2(
            (residual.x * dy.y - residual.y * dy.x) / det,
            (residual.y * dx.x - residual.x * dx.y) / det,
        );
        st = st - step;
        if !st.is_finite() {
            return None;
        }
    }
    let residual = map.sample_bilinear(st)? - target;
    (residual.length() <= INVERT_TOLERANCE).then_some(st)
}
