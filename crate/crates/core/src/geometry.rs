//! Triangle edge-function, barycentric and perspective-correction math
//! shared by every rasterization path.
//!
//! The central object is the 3×3 edge-function matrix: each row is a signed
//! linear function that is zero on one triangle edge and positive toward the
//! interior of a counter-clockwise triangle. Dividing each row by the dot
//! product with its opposite vertex turns the same matrix into a barycentric
//! coordinate transform, which neglects winding. All functions here are pure.

use crate::math::{homogeneous, vec2, Vec2, Vec3};
use thiserror::Error;

/// Denominator guard used by every degeneracy check.
pub const DEGENERACY_EPSILON: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    /// Triangle area (or the vertex/edge-plane dot product) vanished.
    #[error("degenerate triangle: denominator magnitude below {DEGENERACY_EPSILON:e}")]
    DegenerateTriangle,
    /// A row's 2-D prefix collapsed, so the edge has no direction to
    /// normalize along.
    #[error("degenerate edge {0}: 2-D row prefix shorter than {DEGENERACY_EPSILON:e}")]
    DegenerateEdge(usize),
    /// The barycentric/inverse-depth dot product was not positive; the
    /// fragment lies behind the eye or the triangle is degenerate there.
    #[error("behind-eye or degenerate fragment: non-positive depth dot product")]
    BehindEye,
}

/// Per-vertex payload interpolated across the triangle surface.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct VertexData {
    /// Linear-space RGBA color.
    pub color: [f64; 4],
    pub uv: [f64; 2],
}

impl VertexData {
    pub fn with_color(color: [f64; 4]) -> Self {
        VertexData { color, uv: [0.0; 2] }
    }

    /// Weighted sum of three vertices, normally fed the perspective-correct
    /// barycentric triple.
    pub fn interpolate(verts: &[VertexData; 3], weights: [f64; 3]) -> VertexData {
        let mut color = [0.0; 4];
        let mut uv = [0.0; 2];
        for i in 0..3 {
            for c in 0..4 {
                color[c] += weights[i] * verts[i].color[c];
            }
            uv[0] += weights[i] * verts[i].uv[0];
            uv[1] += weights[i] * verts[i].uv[1];
        }
        VertexData { color, uv }
    }
}

/// Triangle projected into a 2-D raster space (pixels for the rectilinear
/// path, `st` texture coordinates for the lookup-map path), with inverse
/// vertex depth kept for perspective correction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Triangle2 {
    pub positions: [Vec2; 3],
    /// Inverse vertex depth, strictly positive.
    pub inv_depth: [f64; 3],
    pub vertex_data: [VertexData; 3],
}

/// Triangle in view space, before any projection. Used by the
/// perspective-map path, which replaces depth by distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Triangle3 {
    pub positions: [Vec3; 3],
    pub vertex_data: [VertexData; 3],
}

impl Triangle3 {
    /// Inverse vertex distances from the eye at the origin.
    pub fn inv_distance(&self) -> [f64; 3] {
        [
            1.0 / self.positions[0].length(),
            1.0 / self.positions[1].length(),
            1.0 / self.positions[2].length(),
        ]
    }
}

/// 3×3 matrix of triangle edge functions. `normalized` records whether rows
/// were 2-D normalized with the half-pixel offset folded into the third
/// column.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeMatrix {
    pub rows: [[f64; 3]; 3],
    pub normalized: bool,
}

impl EdgeMatrix {
    /// Evaluates all three rows at the homogeneous point `[x y 1]`.
    pub fn eval(&self, p: Vec2) -> [f64; 3] {
        self.eval_dir(homogeneous(p))
    }

    /// Evaluates all three rows against an arbitrary 3-vector (used with
    /// unit sphere directions by the perspective-map path).
    pub fn eval_dir(&self, v: Vec3) -> [f64; 3] {
        [
            self.rows[0][0] * v.x + self.rows[0][1] * v.y + self.rows[0][2] * v.z,
            self.rows[1][0] * v.x + self.rows[1][1] * v.y + self.rows[1][2] * v.z,
            self.rows[2][0] * v.x + self.rows[2][1] * v.y + self.rows[2][2] * v.z,
        ]
    }

    /// The 2-D gradient of row `i` (its first two entries).
    pub fn row_gradient(&self, i: usize) -> Vec2 {
        vec2(self.rows[i][0], self.rows[i][1])
    }
}

/// Clamped half-space triple Ξ; each component in `[0, 1]` measures one
/// edge's contribution to pixel coverage.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfSpaceTriple(pub [f64; 3]);

/// Barycentric triple λ (linear or spherical) or λ′ once `corrected` is set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarycentricTriple {
    pub values: [f64; 3],
    pub corrected: bool,
}

impl BarycentricTriple {
    pub fn linear(values: [f64; 3]) -> Self {
        BarycentricTriple { values, corrected: false }
    }

    pub fn sum(&self) -> f64 {
        self.values[0] + self.values[1] + self.values[2]
    }
}

/// Per-edge reciprocal weights ω turning un-offset edge-function values into
/// barycentric components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeWeights(pub [f64; 3]);

fn cross_rows(a: Vec3, b: Vec3) -> [f64; 3] {
    let c = a.cross(b);
    [c.x, c.y, c.z]
}

/// Raw edge-function matrix of the triangle `ABC`: row `i` is the cross
/// product of the two homogeneous vertices opposite vertex `i`, so it
/// vanishes on edge `i` and is positive toward the interior of a
/// counter-clockwise triangle.
pub fn edge_matrix(a: Vec2, b: Vec2, c: Vec2) -> Result<EdgeMatrix, GeometryError> {
    let (ah, bh, ch) = (homogeneous(a), homogeneous(b), homogeneous(c));
    // A·(B×C) is twice the signed triangle area.
    if ah.dot(bh.cross(ch)).abs() < DEGENERACY_EPSILON {
        return Err(GeometryError::DegenerateTriangle);
    }
    Ok(EdgeMatrix {
        rows: [cross_rows(bh, ch), cross_rows(ch, ah), cross_rows(ah, bh)],
        normalized: false,
    })
}

/// 2-D normalizes each row so the gradient slope is exactly one per unit
/// distance, and adds the half offset to the constant column so the value
/// crosses 0.5 on the edge itself.
pub fn normalize_edge_matrix(chi: &EdgeMatrix) -> Result<EdgeMatrix, GeometryError> {
    let mut rows = [[0.0; 3]; 3];
    for i in 0..3 {
        let len = chi.row_gradient(i).length();
        if len < DEGENERACY_EPSILON {
            return Err(GeometryError::DegenerateEdge(i));
        }
        rows[i] = [
            chi.rows[i][0] / len,
            chi.rows[i][1] / len,
            chi.rows[i][2] / len + 0.5,
        ];
    }
    Ok(EdgeMatrix { rows, normalized: true })
}

/// Edge matrix with each row divided by the dot product against its
/// opposite vertex, turning it into a linear-barycentric transform. The
/// division cancels winding, so back-facing triangles map identically.
pub fn barycentric_matrix_planar(a: Vec2, b: Vec2, c: Vec2) -> Result<EdgeMatrix, GeometryError> {
    let (ah, bh, ch) = (homogeneous(a), homogeneous(b), homogeneous(c));
    barycentric_rows([ah, bh, ch], [ah, bh, ch])
}

/// Spherical variant: view-space vertices with the denominator taken
/// against the *normalized* vertex, so multiplying a unit incident
/// direction yields a spherical-barycentric triple.
pub fn barycentric_matrix_spherical(
    a: Vec3,
    b: Vec3,
    c: Vec3,
) -> Result<EdgeMatrix, GeometryError> {
    barycentric_rows([a, b, c], [a.normalized(), b.normalized(), c.normalized()])
}

fn barycentric_rows(verts: [Vec3; 3], denom_verts: [Vec3; 3]) -> Result<EdgeMatrix, GeometryError> {
    let mut rows = [[0.0; 3]; 3];
    for i in 0..3 {
        let opposite = verts[(i + 1) % 3].cross(verts[(i + 2) % 3]);
        let denom = denom_verts[i].dot(opposite);
        if denom.abs() < DEGENERACY_EPSILON {
            return Err(GeometryError::DegenerateTriangle);
        }
        rows[i] = [opposite.x / denom, opposite.y / denom, opposite.z / denom];
    }
    Ok(EdgeMatrix { rows, normalized: false })
}

/// Reciprocal edge weights ωᵢ = (Vᵢ·rowᵢ)⁻¹ for rows scaled exactly as they
/// will be evaluated. For a normalized matrix the folded half offset is
/// removed first, so λᵢ = (f·χ′ᵢ − ½)·ωᵢ.
pub fn edge_weights(
    chi: &EdgeMatrix,
    a: Vec2,
    b: Vec2,
    c: Vec2,
) -> Result<EdgeWeights, GeometryError> {
    let offset = if chi.normalized { 0.5 } else { 0.0 };
    let verts = [a, b, c];
    let mut weights = [0.0; 3];
    for i in 0..3 {
        let d = chi.eval(verts[i])[i] - offset;
        if d.abs() < DEGENERACY_EPSILON {
            return Err(GeometryError::DegenerateTriangle);
        }
        weights[i] = 1.0 / d;
    }
    Ok(EdgeWeights(weights))
}

/// Coverage mask Λ: the product of the three clamped half-space components.
pub fn coverage(xi: HalfSpaceTriple) -> f64 {
    xi.0[0] * xi.0[1] * xi.0[2]
}

/// Perspective correction. Returns the interpolated depth (or distance)
/// `w = (λ·invW)⁻¹` together with λ′ᵢ = w·λᵢ·invWᵢ, which sums to one for
/// any valid interior coordinate.
pub fn perspective_correct(
    lambda: &BarycentricTriple,
    inv_w: [f64; 3],
) -> Result<(f64, BarycentricTriple), GeometryError> {
    let dot = lambda.values[0] * inv_w[0]
        + lambda.values[1] * inv_w[1]
        + lambda.values[2] * inv_w[2];
    if dot <= 0.0 {
        return Err(GeometryError::BehindEye);
    }
    let w = 1.0 / dot;
    let values = [
        w * lambda.values[0] * inv_w[0],
        w * lambda.values[1] * inv_w[1],
        w * lambda.values[2] * inv_w[2],
    ];
    Ok((w, BarycentricTriple { values, corrected: true }))
}
