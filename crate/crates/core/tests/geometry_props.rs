//! Property tests for the barycentric and perspective-correction math.

mod common;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rastermap::geometry::{
    barycentric_matrix_planar, barycentric_matrix_spherical, edge_matrix, normalize_edge_matrix,
    perspective_correct, BarycentricTriple,
};
use rastermap::math::{vec2, Vec2};

fn triangle_strategy() -> impl Strategy<Value = [Vec2; 3]> {
    let coord = -100.0..100.0f64;
    [
        (coord.clone(), coord.clone()),
        (coord.clone(), coord.clone()),
        (coord.clone(), coord),
    ]
    .prop_map(|[(ax, ay), (bx, by), (cx, cy)]| [vec2(ax, ay), vec2(bx, by), vec2(cx, cy)])
    .prop_filter("non-degenerate", |[a, b, c]| {
        let area2 = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
        area2.abs() > 1.0
    })
}

proptest! {
    #[test]
    fn partition_of_unity(tri in triangle_strategy(), px in -200.0..200.0f64, py in -200.0..200.0f64) {
        let m = barycentric_matrix_planar(tri[0], tri[1], tri[2]).unwrap();
        let lam = m.eval(vec2(px, py));
        let sum: f64 = lam.iter().sum();
        prop_assert!((sum - 1.0).abs() <= 1e-9, "Σλ = {sum}");
    }

    #[test]
    fn winding_independence(tri in triangle_strategy(), px in -200.0..200.0f64, py in -200.0..200.0f64) {
        let fwd = barycentric_matrix_planar(tri[0], tri[1], tri[2]).unwrap();
        let rev = barycentric_matrix_planar(tri[0], tri[2], tri[1]).unwrap();
        let a = fwd.eval(vec2(px, py));
        let b = rev.eval(vec2(px, py));
        // Reversing swaps the roles of vertices B and C.
        prop_assert!((a[0] - b[0]).abs() <= 1e-9);
        prop_assert!((a[1] - b[2]).abs() <= 1e-9);
        prop_assert!((a[2] - b[1]).abs() <= 1e-9);
    }

    #[test]
    fn normalized_rows_have_unit_slope(tri in triangle_strategy(), step in 0.25..4.0f64) {
        let chi = edge_matrix(tri[0], tri[1], tri[2]).unwrap();
        let norm = normalize_edge_matrix(&chi).unwrap();
        for i in 0..3 {
            let g = norm.row_gradient(i);
            // Moving along the edge normal changes the row value by the
            // distance moved, exactly one per unit.
            let p = tri[(i + 1) % 3];
            let base = norm.eval(p)[i];
            let moved = norm.eval(p + g * step)[i];
            prop_assert!(
                ((moved - base) - step).abs() <= 1e-9,
                "edge {i}: slope {}",
                (moved - base) / step
            );
        }
    }
}

#[test]
fn vertex_and_edge_identities_over_1000_triangles() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x1db7);
    for _ in 0..1000 {
        let tri = common::random_ccw_triangle(&mut rng, -50.0, 50.0, 0.5);
        let m = barycentric_matrix_planar(tri[0], tri[1], tri[2]).unwrap();
        for i in 0..3 {
            let at_own = m.eval(tri[i])[i];
            assert!((at_own - 1.0).abs() <= 1e-9, "λ_{i} at own vertex: {at_own}");
            // Zero along the opposite edge, sampled at a random point.
            let t: f64 = rng.gen_range(0.0..1.0);
            let on_edge = tri[(i + 1) % 3] + (tri[(i + 2) % 3] - tri[(i + 1) % 3]) * t;
            let v = m.eval(on_edge)[i];
            assert!(v.abs() <= 1e-9, "λ_{i} on opposite edge: {v}");
        }
    }
}

#[test]
fn spherical_matrix_is_unit_at_own_vertex() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x51de);
    for _ in 0..200 {
        let tri = common::random_view_triangle(&mut rng, 1.0, 6.0);
        let m = match barycentric_matrix_spherical(tri[0], tri[1], tri[2]) {
            Ok(m) => m,
            Err(_) => continue,
        };
        for i in 0..3 {
            let lam = m.eval_dir(tri[i].normalized());
            assert!((lam[i] - 1.0).abs() <= 1e-9);
            assert!(lam[(i + 1) % 3].abs() <= 1e-9);
        }
    }
}

#[test]
fn perspective_correction_matches_raycast_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xcafe);
    let uvs = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
    for _ in 0..100 {
        let view = common::random_view_triangle(&mut rng, 1.0, 8.0);
        let projected: Vec<Vec2> = view
            .iter()
            .map(|v| vec2(v.x / v.z, v.y / v.z))
            .collect();
        let m = barycentric_matrix_planar(projected[0], projected[1], projected[2]).unwrap();

        // Random interior point of the projected triangle.
        let (a, b): (f64, f64) = (rng.gen_range(0.05..0.9), rng.gen_range(0.05..0.9));
        let (a, b) = if a + b > 0.95 { (1.0 - a, 1.0 - b) } else { (a, b) };
        let p = projected[0] * (1.0 - a - b) + projected[1] * a + projected[2] * b;

        let lambda = BarycentricTriple::linear(m.eval(p));
        let inv_depth = [1.0 / view[0].z, 1.0 / view[1].z, 1.0 / view[2].z];
        let (_, corrected) = perspective_correct(&lambda, inv_depth).unwrap();
        let uv = [
            corrected.values[0] * uvs[0][0]
                + corrected.values[1] * uvs[1][0]
                + corrected.values[2] * uvs[2][0],
            corrected.values[0] * uvs[0][1]
                + corrected.values[1] * uvs[1][1]
                + corrected.values[2] * uvs[2][1],
        ];
        let oracle = common::raycast_uv(&view, &uvs, p).unwrap();
        assert!(
            (uv[0] - oracle[0]).abs() <= 1e-6 && (uv[1] - oracle[1]).abs() <= 1e-6,
            "uv {uv:?} vs oracle {oracle:?}"
        );
    }
}
