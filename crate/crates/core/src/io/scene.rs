//! Plain-text scene files.
//!
//! Line format, `#` comments and blank lines ignored:
//!
//! ```text
//! bg <r> <g> <b> <a>
//! v <x> <y> <z>  <r> <g> <b> <a>  <u> <v>
//! ```
//!
//! Every three consecutive `v` lines form one triangle (counter-clockwise
//! front-facing). Positions are view-space with `x` right, `y` down and
//! `z` forward; colors are linear RGBA.

use super::IoError;
use crate::geometry::{Triangle3, VertexData};
use crate::math::vec3;
use std::path::Path;

/// Parsed scene: view-space triangles plus a background color.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub triangles: Vec<Triangle3>,
    pub background: [f64; 4],
}

impl Default for Scene {
    fn default() -> Self {
        Scene { triangles: Vec::new(), background: [0.0, 0.0, 0.0, 1.0] }
    }
}

/// Loads a scene file, validating finiteness; errors carry 1-based line
/// numbers.
pub fn load_scene(path: impl AsRef<Path>) -> Result<Scene, IoError> {
    parse_scene(&std::fs::read_to_string(path.as_ref())?)
}

pub fn parse_scene(text: &str) -> Result<Scene, IoError> {
    let mut scene = Scene::default();
    let mut pending: Vec<(Vec<f64>, usize)> = Vec::new();

    for (number, raw) in text.lines().enumerate() {
        let number = number + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let keyword = parts.next().expect("non-empty line has a first token");
        let values: Vec<f64> = parts
            .map(|p| {
                p.parse::<f64>()
                    .map_err(|_| parse_err(number, format!("invalid number {p:?}")))
            })
            .collect::<Result<_, _>>()?;
        if values.iter().any(|v| !v.is_finite()) {
            return Err(parse_err(number, "non-finite coordinate"));
        }
        match keyword {
            "bg" => {
                if values.len() != 4 {
                    return Err(parse_err(number, "bg expects 4 values"));
                }
                scene.background = [values[0], values[1], values[2], values[3]];
            }
            "v" => {
                if values.len() != 9 {
                    return Err(parse_err(
                        number,
                        format!("v expects 9 values (x y z r g b a u v), got {}", values.len()),
                    ));
                }
                pending.push((values, number));
                if pending.len() == 3 {
                    let mut positions = [vec3(0.0, 0.0, 0.0); 3];
                    let mut data = [VertexData::default(); 3];
                    for (i, (v, _)) in pending.iter().enumerate() {
                        positions[i] = vec3(v[0], v[1], v[2]);
                        data[i] = VertexData {
                            color: [v[3], v[4], v[5], v[6]],
                            uv: [v[7], v[8]],
                        };
                    }
                    scene.triangles.push(Triangle3 { positions, vertex_data: data });
                    pending.clear();
                }
            }
            other => {
                return Err(parse_err(number, format!("unknown keyword {other:?}")));
            }
        }
    }
    if let Some((_, line)) = pending.first() {
        return Err(parse_err(
            *line,
            format!("dangling vertices: {} of 3 for the last triangle", pending.len()),
        ));
    }
    Ok(scene)
}

fn parse_err(line: usize, message: impl Into<String>) -> IoError {
    IoError::SceneParse { line, message: message.into() }
}
