//! Scene rendering: projection, primitive ordering, rasterization path
//! selection and fragment merging.

use crate::compositor::{sort_front_to_back, CompositorError, Framebuffer};
use crate::geometry::{GeometryError, Triangle2, Triangle3};
use crate::io::Scene;
use crate::map_gen::{mapping_vector, FovAxis};
use crate::map_raster::{build_min_max_pyramid, rasterize_perspective_map, rasterize_stmap};
use crate::maps::{MapError, PerspectiveMap, STMap};
use crate::math::{vec2, Vec2, Vec3};
use crate::rmaa::{rasterize_rectilinear, RasterOptions};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RenderError {
    #[error(transparent)]
    Compositor(#[from] CompositorError),
    #[error(transparent)]
    Map(#[from] MapError),
}

/// Rectilinear pinhole used to project view-space vertices for the
/// rectilinear and STMap paths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RectCamera {
    /// Angle of view in radians, below 180°.
    pub fov: f64,
    pub fov_axis: FovAxis,
}

impl RectCamera {
    /// Projects into `st` frame coordinates with the vertex depth; `None`
    /// behind the eye.
    pub fn project(&self, v: Vec3, aspect: f64) -> Option<(Vec2, f64)> {
        if v.z <= 0.0 {
            return None;
        }
        let u = mapping_vector(aspect, self.fov_axis);
        let half_tan = (0.5 * self.fov).tan();
        let st = vec2(
            (v.x / v.z) / (2.0 * u.s * half_tan) + 0.5,
            (v.y / v.z) / (2.0 * u.t * half_tan) + 0.5,
        );
        Some((st, v.z))
    }
}

/// Which rasterization path draws the scene.
pub enum RenderMode<'a> {
    Rectilinear(RectCamera),
    /// Triangles are projected with `camera` into the map's source frame,
    /// then rasterized through the distortion lookup.
    StMap { map: &'a STMap, camera: RectCamera },
    PerspectiveMap { map: &'a PerspectiveMap },
}

#[derive(Debug, Clone, Copy)]
pub struct RenderSettings {
    pub raster: RasterOptions,
    /// Fragment color alpha acts as an alpha-to-coverage mask.
    pub alpha_blend: bool,
    /// Multiply the finished composite by the map's vignette channel
    /// (perspective-map mode only).
    pub apply_vignette: bool,
}

impl Default for RenderSettings {
    fn default() -> Self {
        RenderSettings {
            raster: RasterOptions::default(),
            alpha_blend: false,
            apply_vignette: false,
        }
    }
}

/// Per-render diagnostics; degenerate primitives are reported here rather
/// than silently dropped.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RenderStats {
    pub primitives: usize,
    pub degenerate: usize,
    /// Primitives skipped because a vertex lies behind the eye.
    pub behind_eye: usize,
}

/// Renders a scene into a fresh framebuffer. Primitives are ordered
/// front-to-back by nearest vertex; anti-aliased renders use the ordered
/// clip/merge compositor, aliased renders the binary depth test.
pub fn render_scene(
    scene: &Scene,
    width: u32,
    height: u32,
    mode: &RenderMode<'_>,
    settings: &RenderSettings,
) -> Result<(Framebuffer, RenderStats), RenderError> {
    let mut fb = Framebuffer::new(width, height);
    let mut stats = RenderStats { primitives: scene.triangles.len(), ..Default::default() };
    let aspect = width as f64 / height as f64;

    let mut ordered = scene.triangles.clone();
    sort_front_to_back(&mut ordered, Vec3::ZERO);

    let pyramid = match mode {
        RenderMode::StMap { map, .. } => Some(build_min_max_pyramid(map)),
        _ => None,
    };

    for tri in &ordered {
        let fragments = match mode {
            RenderMode::Rectilinear(camera) => {
                let Some(projected) = project_triangle(tri, camera, aspect) else {
                    stats.behind_eye += 1;
                    continue;
                };
                let scaled = Triangle2 {
                    positions: projected.positions.map(|p| {
                        vec2(p.x * width as f64, p.y * height as f64)
                    }),
                    ..projected
                };
                rasterize_rectilinear(&scaled, [width, height], &settings.raster)
            }
            RenderMode::StMap { map, camera } => {
                let Some(projected) = project_triangle(tri, camera, aspect) else {
                    stats.behind_eye += 1;
                    continue;
                };
                rasterize_stmap(&projected, map, &settings.raster, pyramid.as_ref())
            }
            RenderMode::PerspectiveMap { map } => {
                rasterize_perspective_map(tri, map, &settings.raster)
            }
        };
        let fragments = match fragments {
            Ok(f) => f,
            Err(GeometryError::DegenerateTriangle | GeometryError::DegenerateEdge(_)) => {
                stats.degenerate += 1;
                continue;
            }
            Err(GeometryError::BehindEye) => {
                stats.behind_eye += 1;
                continue;
            }
        };
        for fragment in &fragments {
            if settings.raster.anti_alias {
                fb.merge_fragment(fragment, settings.alpha_blend)?;
            } else {
                fb.merge_fragment_depth_tested(fragment);
            }
        }
    }

    fb.fill_background(scene.background);

    if settings.apply_vignette {
        if let RenderMode::PerspectiveMap { map } = mode {
            if map.has_vignette() {
                fb.modulate(|x, y| map.vignette_at(x, y).unwrap_or(1.0) as f64);
            }
        }
    }
    Ok((fb, stats))
}

fn project_triangle(tri: &Triangle3, camera: &RectCamera, aspect: f64) -> Option<Triangle2> {
    let mut positions = [Vec2::ZERO; 3];
    let mut inv_depth = [0.0; 3];
    for i in 0..3 {
        let (st, depth) = camera.project(tri.positions[i], aspect)?;
        positions[i] = st;
        inv_depth[i] = 1.0 / depth;
    }
    Some(Triangle2 { positions, inv_depth, vertex_data: tri.vertex_data })
}
