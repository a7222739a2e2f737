//! Rasterization-map generators.
//!
//! The Universal Perspective model covers the azimuthal projection family
//! through a perspective-type scalar `k` (rectilinear at 1, stereographic at
//! ½, equidistant at 0, equisolid at −½, orthographic at −1), a
//! cylindrical/spherical factor `l` and an anamorphic correction `s`. The
//! same polar sample drives STMap output, unit-sphere Perspective Map output
//! and the natural vignetting mask.

pub mod convert;
pub mod lens;

use crate::maps::{texel_center, MapError, MapKind, PerspectiveMap, STMap};
use crate::math::{vec2, vec3, Vec2, Vec3};
use rayon::prelude::*;
use std::f64::consts::{FRAC_PI_2, PI};

pub use convert::{invert_stmap, perspective_map_to_stmap};
pub use lens::{lens_distort_coord, lens_distort_stmap, LensParams};

/// Radius threshold below which the `tanθ/R` (and `sinθ/R`) factors switch
/// to their analytic limit, removing the center singularity.
pub const CENTER_EPSILON: f64 = 1e-8;

/// Frame axis whose angle of view the projection preserves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FovAxis {
    #[default]
    Horizontal,
    Vertical,
    Diagonal,
    /// Horizontal angle of a centered 4×3 crop.
    Horizontal4x3,
}

impl FovAxis {
    /// Symbol used by CLI flags and the file naming convention.
    pub fn symbol(self) -> &'static str {
        match self {
            FovAxis::Horizontal => "h",
            FovAxis::Vertical => "v",
            FovAxis::Diagonal => "d",
            FovAxis::Horizontal4x3 => "4x3h",
        }
    }
}

/// Universal Perspective parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniversalParams {
    /// Angle of view Ω in radians.
    pub fov: f64,
    pub fov_axis: FovAxis,
    /// Perspective type, in `[-1, 1]`.
    pub k: f64,
    /// Cylindrical (0) to spherical (1) factor; values above 1 compensate
    /// for curved displays.
    pub l: f64,
    /// Anamorphic correction, normally in `[0.8, 1]`.
    pub s: f64,
}

impl Default for UniversalParams {
    fn default() -> Self {
        UniversalParams {
            fov: 90.0_f64.to_radians(),
            fov_axis: FovAxis::Horizontal,
            k: 1.0,
            l: 1.0,
            s: 0.98,
        }
    }
}

impl UniversalParams {
    /// Scale applied to the `y` view coordinate by the anamorphic and
    /// cylindrical factors.
    pub fn y_scale(&self) -> f64 {
        (1.0 - self.l) / self.s + self.l
    }

    /// Range notes for parameters outside their usual envelopes; the values
    /// are still used as given.
    pub fn warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        if !(-1.0..=1.0).contains(&self.k) {
            w.push(format!("perspective type k={} outside [-1, 1]", self.k));
        }
        if self.l > 1.0 {
            w.push(format!(
                "cylindrical factor l={} above 1 (curved-display compensation)",
                self.l
            ));
        }
        if self.l < 0.0 {
            w.push(format!("cylindrical factor l={} below 0", self.l));
        }
        if !(0.8..=1.0).contains(&self.s) {
            w.push(format!("anamorphic correction s={} outside [0.8, 1]", self.s));
        }
        w
    }
}

/// Per-axis scale normalizing the chosen frame axis to the angle of view.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MappingVector {
    pub s: f64,
    pub t: f64,
}

/// AOV normalization scales for a `width/height` aspect ratio.
pub fn mapping_vector(aspect: f64, axis: FovAxis) -> MappingVector {
    match axis {
        FovAxis::Diagonal => {
            let len = (aspect * aspect + 1.0).sqrt();
            MappingVector { s: aspect / len, t: 1.0 / len }
        }
        FovAxis::Horizontal => MappingVector { s: 1.0, t: 1.0 / aspect },
        FovAxis::Horizontal4x3 => MappingVector { s: 0.75 * aspect, t: 0.75 },
        FovAxis::Vertical => MappingVector { s: aspect, t: 1.0 },
    }
}

/// Frame coordinate `[0,1]²` to centered view-plane coordinate:
/// `(2u·f − u)`, so the frame center maps to the origin.
pub fn universal_view_coord(st: Vec2, u: MappingVector) -> Vec2 {
    vec2(2.0 * u.s * st.x - u.s, 2.0 * u.t * st.y - u.t)
}

/// View-plane point with its polar radius and projection angle θ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarSample {
    /// Centered view-plane coordinate `f_xy`.
    pub view: Vec2,
    /// Elliptic radius `R = sqrt(f_x² + l·f_y²)`.
    pub radius: f64,
    /// Angle from the optical axis.
    pub theta: f64,
}

/// Projects a view-plane coordinate through the Universal Perspective
/// model. `None` when the arcsin argument of the `k<0` branch leaves its
/// domain; such texels are masked by the map builders.
pub fn universal_project(view: Vec2, p: &UniversalParams) -> Option<PolarSample> {
    let radius = (view.x * view.x + p.l * view.y * view.y).sqrt();
    let half = 0.5 * p.fov;
    let theta = if p.k > 0.0 {
        (radius * (p.k * half).tan()).atan() / p.k
    } else if p.k == 0.0 {
        radius * half
    } else {
        let arg = radius * (p.k * half).sin();
        if arg.abs() > 1.0 {
            return None;
        }
        arg.asin() / p.k
    };
    Some(PolarSample { view, radius, theta })
}

/// Slope `dθ/dR` at the center, the analytic limit shared by `tanθ/R` and
/// `sinθ/R`.
fn radial_slope_at_center(p: &UniversalParams) -> f64 {
    let half = 0.5 * p.fov;
    if p.k > 0.0 {
        (p.k * half).tan() / p.k
    } else if p.k == 0.0 {
        half
    } else {
        (p.k * half).sin() / p.k
    }
}

/// Scaled view coordinate `f′_xy = (tanθ/R)·(f_x, f_y·y_scale)`, preserving
/// the angle of view. `None` when θ reaches 90° and the point cannot land
/// on a projection plane.
pub fn planar_view_coord(sample: &PolarSample, p: &UniversalParams) -> Option<Vec2> {
    if sample.theta >= FRAC_PI_2 {
        return None;
    }
    let factor = if sample.radius < CENTER_EPSILON {
        radial_slope_at_center(p)
    } else {
        sample.theta.tan() / sample.radius
    };
    Some(vec2(
        factor * sample.view.x,
        factor * sample.view.y * p.y_scale(),
    ))
}

/// Unit view-sphere direction for the sample. The anamorphic/cylindrical
/// `y` scaling is applied before sphere mapping, so `l` and `s` shape both
/// map outputs consistently.
pub fn sphere_dir(sample: &PolarSample, p: &UniversalParams) -> Vec3 {
    let c = if sample.radius < CENTER_EPSILON {
        radial_slope_at_center(p)
    } else {
        sample.theta.sin() / sample.radius
    };
    vec3(
        c * sample.view.x,
        c * sample.view.y * p.y_scale(),
        sample.theta.cos(),
    )
    .normalized()
}

/// Full per-coordinate STMap function: frame coordinate in, distorted
/// source coordinate out. `None` marks out-of-domain texels.
pub fn universal_stmap_coord(st: Vec2, p: &UniversalParams, u: MappingVector) -> Option<Vec2> {
    let sample = universal_project(universal_view_coord(st, u), p)?;
    let fp = planar_view_coord(&sample, p)?;
    let denom = (0.5 * p.fov).tan();
    Some(vec2(
        fp.x / (2.0 * u.s * denom) + 0.5,
        fp.y / (2.0 * u.t * denom) + 0.5,
    ))
}

/// Natural vignetting factors derived from a polar sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VignetteSample {
    /// Spherical term: cosine law blended toward the inverse-square law by
    /// the perspective type.
    pub spherical: f64,
    /// Cylindrical term: inverse-square length of the incident vector.
    pub cylindrical: f64,
    /// Combined linear mask `v = v_s·v_c`.
    pub value: f64,
    /// Gamma-encoded mask `v′`.
    pub encoded: f64,
}

/// Encoding transfer `gamma(w, γ) = w^(1/γ)`.
pub fn gamma_encode(w: f64, gamma: f64) -> f64 {
    w.powf(1.0 / gamma)
}

/// Natural vignetting of the Universal Perspective model.
pub fn vignette(sample: &PolarSample, k: f64, gamma: f64) -> VignetteSample {
    let theta_p = sample.theta * k.abs().max(0.5);
    let spherical = if theta_p >= FRAC_PI_2 {
        0.0
    } else {
        let weight = (k + 0.5).clamp(0.0, 1.0);
        let cosine = theta_p.cos();
        let tan = theta_p.tan();
        let inverse_square = 1.0 / (1.0 + tan * tan);
        cosine + (inverse_square - cosine) * weight
    };
    let c = if sample.radius < CENTER_EPSILON {
        0.0
    } else {
        sample.theta.sin() / sample.radius
    };
    let incident = vec3(c * sample.view.x, c * sample.view.y, sample.theta.cos());
    let cylindrical = 1.0 / incident.dot(incident);
    let value = spherical * cylindrical;
    VignetteSample {
        spherical,
        cylindrical,
        value,
        encoded: gamma_encode(value, gamma),
    }
}

fn record_universal_metadata(meta: &mut crate::maps::MapMetadata, p: &UniversalParams) {
    meta.set("fovAxis", p.fov_axis.symbol());
    meta.set("fovDegrees", p.fov.to_degrees());
    meta.set("k", p.k);
    meta.set("l", p.l);
    meta.set("s", p.s);
}

/// Generates a distorting Universal Perspective STMap. The planar output
/// normalization divides by `tan(Ω/2)`, so the angle of view must stay
/// below 180°; wider views need a Perspective Map.
pub fn universal_stmap(p: &UniversalParams, width: u32, height: u32) -> Result<STMap, MapError> {
    if !(p.fov > 0.0 && p.fov < PI) {
        return Err(MapError::FovOutOfRange(
            p.fov.to_degrees(),
            "in (0°, 180°) for STMap output",
        ));
    }
    let mut map = STMap::new(width, height, MapKind::Distort)?;
    let u = mapping_vector(map.aspect(), p.fov_axis);
    let rows: Vec<Vec<(Vec2, f32)>> = (0..height)
        .into_par_iter()
        .map(|y| {
            (0..width)
                .map(|x| {
                    match universal_stmap_coord(texel_center(x, y, width, height), p, u) {
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
    record_universal_metadata(&mut map.metadata, p);
    Ok(map)
}

/// Generates a Universal Perspective Map of unit sphere directions, with an
/// optional linear vignette channel. Supports angles of view up to 360°,
/// except that positive perspective types cannot reach `k·Ω ≥ 180°`.
pub fn universal_perspective_map(
    p: &UniversalParams,
    width: u32,
    height: u32,
    with_vignette: bool,
) -> Result<PerspectiveMap, MapError> {
    if !(p.fov > 0.0 && p.fov <= 2.0 * PI) {
        return Err(MapError::FovOutOfRange(p.fov.to_degrees(), "in (0°, 360°]"));
    }
    if p.k > 0.0 && p.k * p.fov >= PI {
        return Err(MapError::FovOutOfRange(
            p.fov.to_degrees(),
            "small enough that k·Ω stays below 180° for k > 0",
        ));
    }
    let mut map = PerspectiveMap::new(width, height, with_vignette)?;
    let u = mapping_vector(map.aspect(), p.fov_axis);
    let rows: Vec<Vec<Option<(Vec3, f64)>>> = (0..height)
        .into_par_iter()
        .map(|y| {
            (0..width)
                .map(|x| {
                    let view = universal_view_coord(texel_center(x, y, width, height), u);
                    universal_project(view, p)
                        // θ beyond 180° has wrapped past the back pole.
                        .filter(|sample| sample.theta <= PI)
                        .map(|sample| {
                            let dir = sphere_dir(&sample, p);
                            let v = vignette(&sample, p.k, 2.2).value.clamp(0.0, 1.0);
                            (dir, v)
                        })
                })
                .collect()
        })
        .collect();
    for (y, row) in rows.into_iter().enumerate() {
        for (x, texel) in row.into_iter().enumerate() {
            let (x, y) = (x as u32, y as u32);
            match texel {
                Some((dir, v)) => {
                    map.set(x, y, dir);
                    map.set_vignette(x, y, v as f32);
                }
                None => {
                    map.set(x, y, vec3(0.0, 0.0, 1.0));
                    map.set_vignette(x, y, 0.0);
                    map.set_mask(x, y, 0.0);
                }
            }
        }
    }
    record_universal_metadata(&mut map.metadata, p);
    Ok(map)
}

/// Parses the stored Universal Perspective metadata back, when present.
pub fn universal_params_from_metadata(meta: &crate::maps::MapMetadata) -> Option<UniversalParams> {
    let axis = match meta.get("fovAxis")? {
        "h" => FovAxis::Horizontal,
        "v" => FovAxis::Vertical,
        "d" => FovAxis::Diagonal,
        "4x3h" => FovAxis::Horizontal4x3,
        _ => return None,
    };
    Some(UniversalParams {
        fov: meta.get("fovDegrees")?.parse::<f64>().ok()?.to_radians(),
        fov_axis: axis,
        k: meta.get("k")?.parse().ok()?,
        l: meta.get("l")?.parse().ok()?,
        s: meta.get("s")?.parse().ok()?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(fov_deg: f64, axis: FovAxis, k: f64, l: f64, s: f64) -> UniversalParams {
        UniversalParams { fov: fov_deg.to_radians(), fov_axis: axis, k, l, s }
    }

    #[test]
    fn mapping_vector_cases() {
        let a = 16.0 / 9.0;
        let h = mapping_vector(a, FovAxis::Horizontal);
        assert!((h.s - 1.0).abs() < 1e-15);
        assert!((h.t - 0.5625).abs() < 1e-15);

        let d = mapping_vector(a, FovAxis::Diagonal);
        assert!((d.s - 0.8716).abs() < 1e-4);
        assert!((d.t - 0.4902).abs() < 1e-4);

        let v = mapping_vector(1.0, FovAxis::Vertical);
        assert_eq!((v.s, v.t), (1.0, 1.0));

        let c = mapping_vector(4.0 / 3.0, FovAxis::Horizontal4x3);
        assert!((c.s - 1.0).abs() < 1e-15);
        assert!((c.t - 0.75).abs() < 1e-15);
    }

    #[test]
    fn view_coord_examples() {
        let u = MappingVector { s: 1.0, t: 0.5625 };
        assert_eq!(universal_view_coord(vec2(0.5, 0.5), u), Vec2::ZERO);
        let r = universal_view_coord(vec2(1.0, 0.5), u);
        assert_eq!(r, vec2(1.0, 0.0));
        let c = universal_view_coord(vec2(0.0, 0.0), MappingVector { s: 1.0, t: 1.0 });
        assert_eq!(c, vec2(-1.0, -1.0));
    }

    #[test]
    fn rectilinear_projection_reduces_to_tangent_scale() {
        // k=1, l=1 gives f′ = tan(Ω/2)·f for every input.
        let p = params(72.0, FovAxis::Horizontal, 1.0, 1.0, 0.98);
        let scale = (p.fov / 2.0).tan();
        for view in [vec2(0.3, -0.2), vec2(-0.9, 0.7), vec2(0.0, 1.0), vec2(1.0, 0.0)] {
            let sample = universal_project(view, &p).unwrap();
            let fp = planar_view_coord(&sample, &p).unwrap();
            assert!((fp.x - scale * view.x).abs() < 1e-12);
            assert!((fp.y - scale * view.y).abs() < 1e-12);
        }
    }

    #[test]
    fn center_is_fixed_point() {
        for k in [-1.0, -0.5, 0.0, 0.5, 1.0] {
            let p = params(120.0, FovAxis::Horizontal, k, 0.6, 0.9);
            let sample = universal_project(Vec2::ZERO, &p).unwrap();
            let fp = planar_view_coord(&sample, &p).unwrap();
            assert_eq!(fp, Vec2::ZERO);
        }
    }

    #[test]
    fn equidistant_half_right_angle() {
        let p = params(90.0, FovAxis::Horizontal, 0.0, 1.0, 0.98);
        let sample = universal_project(vec2(1.0, 0.0), &p).unwrap();
        assert!((sample.theta - 45.0_f64.to_radians()).abs() < 1e-15);
        let fp = planar_view_coord(&sample, &p).unwrap();
        assert!((fp.x - 1.0).abs() < 1e-12);
        assert_eq!(fp.y, 0.0);
    }

    #[test]
    fn arcsin_domain_masks() {
        let p = params(170.0, FovAxis::Horizontal, -1.0, 1.0, 0.98);
        // Corner radius sqrt(2) pushes |R·sin(kΩ/2)| above one.
        assert!(universal_project(vec2(1.0, 1.0), &p).is_none());
        assert!(universal_project(vec2(0.5, 0.0), &p).is_some());
    }

    #[test]
    fn stmap_identity_for_rectilinear() {
        let p = params(90.0, FovAxis::Horizontal, 1.0, 1.0, 0.98);
        let map = universal_stmap(&p, 32, 32).unwrap();
        for y in 0..32 {
            for x in 0..32 {
                let c = texel_center(x, y, 32, 32);
                let v = map.get(x, y);
                assert!((v.x - c.x).abs() < 1e-6 && (v.y - c.y).abs() < 1e-6);
                assert!(map.is_valid(x, y));
            }
        }
    }

    #[test]
    fn stmap_center_coordinate_fixed_for_all_parameters() {
        for (k, l, s) in [(1.0, 1.0, 0.98), (0.5, 0.2, 0.9), (-1.0, 0.0, 0.8), (0.0, 0.75, 1.0)] {
            let p = params(130.0, FovAxis::Diagonal, k, l, s);
            let u = mapping_vector(1.5, p.fov_axis);
            let v = universal_stmap_coord(vec2(0.5, 0.5), &p, u).unwrap();
            assert!((v.x - 0.5).abs() < 1e-12 && (v.y - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn stmap_preserves_equidistant_horizontal_aov() {
        let p = params(90.0, FovAxis::Horizontal, 0.0, 1.0, 0.98);
        let u = mapping_vector(2.0, p.fov_axis);
        let v = universal_stmap_coord(vec2(1.0, 0.5), &p, u).unwrap();
        assert!((v.x - 1.0).abs() < 1e-12);
    }

    #[test]
    fn stmap_rejects_wide_fov_and_odd_size() {
        let p = params(180.0, FovAxis::Horizontal, 0.0, 1.0, 0.98);
        assert!(matches!(
            universal_stmap(&p, 32, 32),
            Err(MapError::FovOutOfRange(..))
        ));
        let ok = params(90.0, FovAxis::Horizontal, 1.0, 1.0, 0.98);
        assert!(matches!(
            universal_stmap(&ok, 31, 32),
            Err(MapError::OddResolution(31, 32))
        ));
    }

    #[test]
    fn perspective_map_center_and_edge_directions() {
        let p = params(90.0, FovAxis::Horizontal, 1.0, 1.0, 0.98);
        let pm = universal_perspective_map(&p, 64, 64, false).unwrap();
        // Forward axis between the four central texels.
        let g = pm.get(31, 31) + pm.get(32, 31) + pm.get(31, 32) + pm.get(32, 32);
        let g = g.normalized();
        assert!((g.z - 1.0).abs() < 1e-4);

        // Right-edge center of the continuous function: θ = 45° on x–z.
        let u = mapping_vector(1.0, p.fov_axis);
        let sample = universal_project(universal_view_coord(vec2(1.0, 0.5), u), &p).unwrap();
        let dir = sphere_dir(&sample, &p);
        let expected = 0.5_f64.sqrt();
        assert!((dir.x - expected).abs() < 1e-12);
        assert!(dir.y.abs() < 1e-12);
        assert!((dir.z - expected).abs() < 1e-12);
    }

    #[test]
    fn perspective_map_unit_length_everywhere_valid() {
        let p = params(270.0, FovAxis::Horizontal, 0.0, 0.75, 0.98);
        let pm = universal_perspective_map(&p, 32, 32, true).unwrap();
        for y in 0..32 {
            for x in 0..32 {
                if pm.is_valid(x, y) {
                    assert!((pm.get(x, y).length() - 1.0).abs() < 1e-6);
                }
            }
        }
    }

    #[test]
    fn perspective_map_rejects_gnomonic_past_180() {
        let p = params(200.0, FovAxis::Horizontal, 1.0, 1.0, 0.98);
        assert!(matches!(
            universal_perspective_map(&p, 32, 32, false),
            Err(MapError::FovOutOfRange(..))
        ));
    }

    #[test]
    fn vignette_on_axis_is_one() {
        let sample = PolarSample { view: Vec2::ZERO, radius: 0.0, theta: 0.0 };
        let v = vignette(&sample, 1.0, 2.2);
        assert_eq!(
            (v.spherical, v.cylindrical, v.value, v.encoded),
            (1.0, 1.0, 1.0, 1.0)
        );
    }

    #[test]
    fn vignette_inverse_square_for_rectilinear() {
        // k=1 at θ=60°: pure inverse-square law, cos²60° = ¼.
        let theta = 60.0_f64.to_radians();
        let sample = PolarSample { view: vec2(1.0, 0.0), radius: 1.0, theta };
        let v = vignette(&sample, 1.0, 2.2);
        assert!((v.spherical - 0.25).abs() < 1e-12);
    }

    #[test]
    fn vignette_cosine_law_for_orthographic() {
        let theta = 60.0_f64.to_radians();
        let sample = PolarSample { view: vec2(1.0, 0.0), radius: 1.0, theta };
        let v = vignette(&sample, -1.0, 2.2);
        assert!((v.spherical - 0.5).abs() < 1e-12);
    }

    #[test]
    fn vignette_cylindrical_term_is_unity_for_spherical_projection() {
        // l=1 makes R the true view radius, so the incident vector is unit.
        let p = params(150.0, FovAxis::Horizontal, 0.0, 1.0, 0.98);
        for st in [vec2(0.9, 0.1), vec2(0.2, 0.8), vec2(0.5, 0.99)] {
            let u = mapping_vector(1.0, p.fov_axis);
            let sample = universal_project(universal_view_coord(st, u), &p).unwrap();
            let v = vignette(&sample, p.k, 2.2);
            assert!((v.cylindrical - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn metadata_round_trip() {
        let p = params(124.0, FovAxis::Diagonal, 0.5, 0.62, 0.98);
        let map = universal_stmap(&p, 8, 8).unwrap();
        let q = universal_params_from_metadata(&map.metadata).unwrap();
        assert!((q.fov - p.fov).abs() < 1e-12);
        assert_eq!(q.fov_axis, p.fov_axis);
        assert_eq!((q.k, q.l, q.s), (p.k, p.l, p.s));
    }
}
