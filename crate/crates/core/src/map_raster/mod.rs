//! Rasterization through lookup maps.
//!
//! The STMap path samples a 2-D source coordinate per screen pixel,
//! evaluates the dot-divided (winding-free) barycentric matrix there, and
//! scales each barycentric gradient to one pixel width using the map's
//! local Jacobian — the software replacement for hardware screen-space
//! derivatives. The Perspective Map path does the same against unit sphere
//! directions, with the depth pass replaced by a distance pass.

pub mod region;

use crate::geometry::{
    barycentric_matrix_planar, barycentric_matrix_spherical, perspective_correct,
    BarycentricTriple, GeometryError, Triangle2, Triangle3, VertexData,
};
use crate::maps::{PerspectiveMap, STMap};
use crate::math::{vec2, Vec2, Vec3};
use crate::rmaa::{pix_step, Fragment, GradientSample, RasterOptions};
use rayon::prelude::*;

pub use region::{
    build_min_max_pyramid, overlap_bb, render_region, st_bounding_box, test_bb, MinMaxPyramid,
    StBox,
};

/// Screen-space Jacobian of an STMap: per-pixel derivatives of the two
/// stored coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MapJacobian {
    /// `(∂s/∂x, ∂s/∂y)`.
    pub ds: Vec2,
    /// `(∂t/∂x, ∂t/∂y)`.
    pub dt: Vec2,
}

/// Screen-space Jacobian of a Perspective Map: per-pixel derivatives of the
/// direction vector.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PmapJacobian {
    pub dx: Vec3,
    pub dy: Vec3,
}

// Central difference over valid neighbors, one-sided at mask and frame
// borders, zero for an isolated texel.
fn difference<T, G>(get: G, center: T, lo: Option<T>, hi: Option<T>) -> f64
where
    T: Copy,
    G: Fn(T) -> Option<f64>,
{
    let lo = lo.and_then(&get);
    let hi = hi.and_then(&get);
    let c = get(center);
    match (lo, hi, c) {
        (Some(a), Some(b), _) => (b - a) * 0.5,
        (Some(a), None, Some(c)) => c - a,
        (None, Some(b), Some(c)) => b - c,
        _ => 0.0,
    }
}

/// Map-texel derivatives at a pixel of an STMap.
pub fn stmap_jacobian(map: &STMap, x: u32, y: u32) -> MapJacobian {
    let value = |p: (u32, u32), c: usize| -> Option<f64> {
        map.is_valid(p.0, p.1).then(|| {
            let v = map.get(p.0, p.1);
            if c == 0 {
                v.x
            } else {
                v.y
            }
        })
    };
    let left = (x > 0).then(|| (x - 1, y));
    let right = (x + 1 < map.width()).then(|| (x + 1, y));
    let up = (y > 0).then(|| (x, y - 1));
    let down = (y + 1 < map.height()).then(|| (x, y + 1));
    MapJacobian {
        ds: vec2(
            difference(|p| value(p, 0), (x, y), left, right),
            difference(|p| value(p, 0), (x, y), up, down),
        ),
        dt: vec2(
            difference(|p| value(p, 1), (x, y), left, right),
            difference(|p| value(p, 1), (x, y), up, down),
        ),
    }
}

/// Direction derivatives at a pixel of a Perspective Map.
pub fn pmap_jacobian(pm: &PerspectiveMap, x: u32, y: u32) -> PmapJacobian {
    let value = |p: (u32, u32), c: usize| -> Option<f64> {
        pm.is_valid(p.0, p.1).then(|| {
            let v = pm.get(p.0, p.1);
            [v.x, v.y, v.z][c]
        })
    };
    let left = (x > 0).then(|| (x - 1, y));
    let right = (x + 1 < pm.width()).then(|| (x + 1, y));
    let up = (y > 0).then(|| (x, y - 1));
    let down = (y + 1 < pm.height()).then(|| (x, y + 1));
    let mut dx = [0.0; 3];
    let mut dy = [0.0; 3];
    for c in 0..3 {
        dx[c] = difference(|p| value(p, c), (x, y), left, right);
        dy[c] = difference(|p| value(p, c), (x, y), up, down);
    }
    PmapJacobian {
        dx: crate::math::vec3(dx[0], dx[1], dx[2]),
        dy: crate::math::vec3(dy[0], dy[1], dy[2]),
    }
}

fn candidate_pixels(
    width: u32,
    height: u32,
    pyramid: Option<&MinMaxPyramid>,
    bb: &StBox,
) -> Vec<[u32; 2]> {
    match pyramid {
        Some(pyr) => render_region(pyr, bb),
        None => {
            let mut all = Vec::with_capacity((width * height) as usize);
            for y in 0..height {
                for x in 0..width {
                    all.push([x, y]);
                }
            }
            all
        }
    }
}

fn emit<FV, FJ>(
    pixels: &[[u32; 2]],
    opts: &RasterOptions,
    lambda_at: FV,
    grads_at: FJ,
    inv_w: [f64; 3],
    vertex_data: &[VertexData; 3],
) -> Vec<Fragment>
where
    FV: Fn(u32, u32) -> Option<[f64; 3]> + Sync,
    FJ: Fn(u32, u32, &[f64; 3]) -> [Vec2; 3] + Sync,
{
    pixels
        .par_iter()
        .map(|&[x, y]| {
            let lambda = lambda_at(x, y)?;
            let cov = if opts.anti_alias {
                let grads = grads_at(x, y, &lambda);
                let mut cov = 1.0;
                for i in 0..3 {
                    cov *= pix_step(
                        GradientSample {
                            value: lambda[i],
                            ddx: grads[i].x,
                            ddy: grads[i].y,
                        },
                        opts.variant,
                    );
                }
                cov
            } else if lambda.iter().all(|&v| v >= 0.0) {
                1.0
            } else {
                0.0
            };
            if cov <= 0.0 {
                return None;
            }
            let (depth, corrected) =
                perspective_correct(&BarycentricTriple::linear(lambda), inv_w).ok()?;
            Some(Fragment {
                pixel: [x, y],
                coverage: cov,
                depth,
                bary: corrected.values,
                data: VertexData::interpolate(vertex_data, corrected.values),
            })
        })
        .collect::<Vec<Option<Fragment>>>()
        .into_iter()
        .flatten()
        .collect()
}

/// Rasterizes a triangle given in STMap space (`[0,1]²` after perspective
/// division) through a distorting STMap. Masked texels produce no
/// fragments; back-facing windings rasterize identically to front-facing
/// ones. Pass a pyramid to restrict evaluation to the primitive's render
/// region.
pub fn rasterize_stmap(
    tri: &Triangle2,
    map: &STMap,
    opts: &RasterOptions,
    pyramid: Option<&MinMaxPyramid>,
) -> Result<Vec<Fragment>, GeometryError> {
    let [a, b, c] = tri.positions;
    let chi = barycentric_matrix_planar(a, b, c)?;
    let bb = st_bounding_box(a, b, c);
    let pixels = candidate_pixels(map.width(), map.height(), pyramid, &bb);

    let lambda_at = |x: u32, y: u32| -> Option<[f64; 3]> {
        map.is_valid(x, y).then(|| chi.eval(map.get(x, y)))
    };
    let grads_at = |x: u32, y: u32, _lambda: &[f64; 3]| -> [Vec2; 3] {
        let j = stmap_jacobian(map, x, y);
        let mut grads = [Vec2::ZERO; 3];
        for i in 0..3 {
            grads[i] = vec2(
                chi.rows[i][0] * j.ds.x + chi.rows[i][1] * j.dt.x,
                chi.rows[i][0] * j.ds.y + chi.rows[i][1] * j.dt.y,
            );
        }
        grads
    };
    Ok(emit(
        &pixels,
        opts,
        lambda_at,
        grads_at,
        tri.inv_depth,
        &tri.vertex_data,
    ))
}

/// Rasterizes a view-space triangle through a Perspective Map. The
/// barycentric matrix is built against normalized vertices, coverage works
/// on the spherical-barycentric triple, and the depth pass is replaced by
/// the distance to the triangle plane along each texel direction.
pub fn rasterize_perspective_map(
    tri: &Triangle3,
    pm: &PerspectiveMap,
    opts: &RasterOptions,
) -> Result<Vec<Fragment>, GeometryError> {
    let [a, b, c] = tri.positions;
    let chi = barycentric_matrix_spherical(a, b, c)?;
    let mut pixels = Vec::with_capacity((pm.width() * pm.height()) as usize);
    for y in 0..pm.height() {
        for x in 0..pm.width() {
            pixels.push([x, y]);
        }
    }

    let lambda_at = |x: u32, y: u32| -> Option<[f64; 3]> {
        pm.is_valid(x, y).then(|| chi.eval_dir(pm.get(x, y)))
    };
    let grads_at = |x: u32, y: u32, _lambda: &[f64; 3]| -> [Vec2; 3] {
        let j = pmap_jacobian(pm, x, y);
        let mut grads = [Vec2::ZERO; 3];
        for i in 0..3 {
            let row = crate::math::vec3(chi.rows[i][0], chi.rows[i][1], chi.rows[i][2]);
            grads[i] = vec2(row.dot(j.dx), row.dot(j.dy));
        }
        grads
    };
    Ok(emit(
        &pixels,
        opts,
        lambda_at,
        grads_at,
        tri.inv_distance(),
        &tri.vertex_data,
    ))
}
