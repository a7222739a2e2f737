//! Render-region evaluation for lookup-map rasterization.
//!
//! A curvilinear map has no screen-space bounding box, so candidate pixels
//! come from a min/max interval pyramid over the map: each level-0 texel
//! carries its coordinate spread by half the local gradient, parents take
//! component-wise interval hulls, and descent prunes tiles whose interval
//! cannot touch the primitive's map-space box. The result is a conservative
//! superset; leaf tiles refine per pixel with an interval-overlap test, so
//! edge blur is never clipped away.

use crate::maps::STMap;
use crate::math::Vec2;

use super::stmap_jacobian;

/// Axis-aligned box in map (`st`) space; min/max of the primitive vertices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StBox {
    pub min: Vec2,
    pub max: Vec2,
}

/// Un-expanded vertex bounding box in map space.
pub fn st_bounding_box(a: Vec2, b: Vec2, c: Vec2) -> StBox {
    StBox { min: a.min(b).min(c), max: a.max(b).max(c) }
}

/// The containment conjunction from the lookup-map pipeline: the texel's
/// half-gradient footprint must lie inside the box (lower bounds closed,
/// upper bounds open).
pub fn test_bb(value: Vec2, half_grad: Vec2, bb: &StBox) -> bool {
    value.x - half_grad.x >= bb.min.x
        && value.y - half_grad.y >= bb.min.y
        && value.x + half_grad.x < bb.max.x
        && value.y + half_grad.y < bb.max.y
}

/// Interval-overlap variant used for region refinement; a superset of
/// [`test_bb`] passers that also keeps pixels whose footprint merely
/// touches the box.
pub fn overlap_bb(value: Vec2, half_grad: Vec2, bb: &StBox) -> bool {
    value.x + half_grad.x >= bb.min.x
        && value.y + half_grad.y >= bb.min.y
        && value.x - half_grad.x <= bb.max.x
        && value.y - half_grad.y <= bb.max.y
}

/// Pixel tile edge (in pixels) below which descent switches to per-pixel
/// refinement.
const LEAF_TILE: u32 = 8;

/// Interval sentinel for fully masked nodes: empty on both axes.
const EMPTY: [f64; 4] = [f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY];

/// Min/max MIP pyramid over a map's texel footprints. Level 0 holds
/// `(s−½|∇s|, t−½|∇t|, s+½|∇s|, t+½|∇t|)`; each parent is the interval
/// hull of its children. Masked texels are excluded, and a fully masked
/// map yields an empty pyramid.
#[derive(Debug, Clone)]
pub struct MinMaxPyramid {
    width: u32,
    height: u32,
    /// `levels[0]` is full resolution; the last level is 1×1.
    levels: Vec<Level>,
}

#[derive(Debug, Clone)]
struct Level {
    width: u32,
    height: u32,
    nodes: Vec<[f64; 4]>,
}

impl Level {
    fn get(&self, x: u32, y: u32) -> [f64; 4] {
        self.nodes[(y * self.width + x) as usize]
    }
}

impl MinMaxPyramid {
    pub fn level_count(&self) -> usize {
        self.levels.len()
    }

    /// Level-0 interval of a texel; `None` on masked texels.
    pub fn footprint(&self, x: u32, y: u32) -> Option<[f64; 4]> {
        let node = self.levels[0].get(x, y);
        (node != EMPTY).then_some(node)
    }
}

/// Builds the interval pyramid for an STMap.
pub fn build_min_max_pyramid(map: &STMap) -> MinMaxPyramid {
    let (width, height) = (map.width(), map.height());
    let mut base = Level {
        width,
        height,
        nodes: vec![EMPTY; (width * height) as usize],
    };
    for y in 0..height {
        for x in 0..width {
            if !map.is_valid(x, y) {
                continue;
            }
            let v = map.get(x, y);
            let j = stmap_jacobian(map, x, y);
            let hs = 0.5 * j.ds.length();
            let ht = 0.5 * j.dt.length();
            base.nodes[(y * width + x) as usize] = [v.x - hs, v.y - ht, v.x + hs, v.y + ht];
        }
    }

    let mut levels = vec![base];
    while levels.last().map(|l| l.width > 1 || l.height > 1) == Some(true) {
        let child = levels.last().expect("at least the base level exists");
        let width = child.width.div_ceil(2);
        let height = child.height.div_ceil(2);
        let mut nodes = vec![EMPTY; (width * height) as usize];
        for y in 0..height {
            for x in 0..width {
                let mut hull = EMPTY;
                for (cx, cy) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
                    let (cx, cy) = (2 * x + cx, 2 * y + cy);
                    if cx >= child.width || cy >= child.height {
                        continue;
                    }
                    let n = child.get(cx, cy);
                    hull = [
                        hull[0].min(n[0]),
                        hull[1].min(n[1]),
                        hull[2].max(n[2]),
                        hull[3].max(n[3]),
                    ];
                }
                nodes[(y * width + x) as usize] = hull;
            }
        }
        levels.push(Level { width, height, nodes });
    }
    MinMaxPyramid { width, height, levels }
}

fn interval_overlaps(node: &[f64; 4], bb: &StBox) -> bool {
    node[2] >= bb.min.x && node[0] <= bb.max.x && node[3] >= bb.min.y && node[1] <= bb.max.y
}

/// Candidate pixels whose footprint may touch `bb`, in row-major order.
/// Guaranteed superset of the pixels passing the containment conjunction.
pub fn render_region(pyr: &MinMaxPyramid, bb: &StBox) -> Vec<[u32; 2]> {
    let mut pixels = Vec::new();
    let top = pyr.levels.len() - 1;
    descend(pyr, bb, top, 0, 0, &mut pixels);
    pixels.sort_unstable_by_key(|&[x, y]| (y, x));
    pixels
}

fn descend(
    pyr: &MinMaxPyramid,
    bb: &StBox,
    level: usize,
    x: u32,
    y: u32,
    out: &mut Vec<[u32; 2]>,
) {
    let node = pyr.levels[level].get(x, y);
    if node == EMPTY || !interval_overlaps(&node, bb) {
        return;
    }
    let span = 1u32 << level;
    if span <= LEAF_TILE {
        // Per-pixel refinement inside the tile.
        let x0 = x * span;
        let y0 = y * span;
        for py in y0..(y0 + span).min(pyr.height) {
            for px in x0..(x0 + span).min(pyr.width) {
                let leaf = pyr.levels[0].get(px, py);
                if leaf != EMPTY && interval_overlaps(&leaf, bb) {
                    out.push([px, py]);
                }
            }
        }
        return;
    }
    for (cx, cy) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
        let (cx, cy) = (2 * x + cx, 2 * y + cy);
        let child = &pyr.levels[level - 1];
        if cx < child.width && cy < child.height {
            descend(pyr, bb, level - 1, cx, cy, out);
        }
    }
}
