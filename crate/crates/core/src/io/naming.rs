//! Rasterization-map file naming convention.
//!
//! Names are `<description>_<layer>.exr` for single-layer files, or
//! `<description>_(<layers joined by _>)_(<properties>).exr` with optional
//! parenthesized property and layer groups, e.g.
//! `AnamorphicWide_(Pm_St_P_V)_(d140_k0_l0.62_s0.98).exr`.

use std::fmt;
use thiserror::Error;

/// Layer symbols and their channel layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LayerKind {
    /// Perspective Map, 3×f32.
    Pm,
    /// Distorting STMap, 2×f32.
    St,
    /// Undistorting STMap, 2×f32.
    USt,
    /// Parallax map, 1×f32.
    P,
    /// Vignetting mask, stored 8-bit.
    V,
    /// Bounds mask, stored 8-bit.
    M,
    /// Perspective Map with vignetting alpha, 4×f32.
    PmV,
    /// Perspective Map with parallax alpha, 4×f32.
    PmP,
    /// Perspective Map with bounds-mask alpha, 4×f32.
    PmM,
    /// STMap with vignetting channel, 3×f32.
    StV,
    /// STMap with parallax channel, 3×f32.
    StP,
    /// STMap with bounds-mask channel, 3×f32.
    StM,
}

impl LayerKind {
    pub const ALL: [LayerKind; 12] = [
        LayerKind::Pm,
        LayerKind::St,
        LayerKind::USt,
        LayerKind::P,
        LayerKind::V,
        LayerKind::M,
        LayerKind::PmV,
        LayerKind::PmP,
        LayerKind::PmM,
        LayerKind::StV,
        LayerKind::StP,
        LayerKind::StM,
    ];

    pub fn symbol(self) -> &'static str {
        match self {
            LayerKind::Pm => "Pm",
            LayerKind::St => "St",
            LayerKind::USt => "uSt",
            LayerKind::P => "P",
            LayerKind::V => "V",
            LayerKind::M => "M",
            LayerKind::PmV => "PmV",
            LayerKind::PmP => "PmP",
            LayerKind::PmM => "PmM",
            LayerKind::StV => "StV",
            LayerKind::StP => "StP",
            LayerKind::StM => "StM",
        }
    }

    pub fn channels(self) -> usize {
        match self {
            LayerKind::P | LayerKind::V | LayerKind::M => 1,
            LayerKind::St | LayerKind::USt => 2,
            LayerKind::Pm | LayerKind::StV | LayerKind::StP | LayerKind::StM => 3,
            LayerKind::PmV | LayerKind::PmP | LayerKind::PmM => 4,
        }
    }

    /// `true` when the single channel is stored 8-bit rather than float.
    pub fn stored_8bit(self) -> bool {
        matches!(self, LayerKind::V | LayerKind::M)
    }

    pub fn from_symbol(symbol: &str) -> Option<LayerKind> {
        LayerKind::ALL.iter().copied().find(|k| k.symbol() == symbol)
    }
}

impl fmt::Display for LayerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// Field-of-view symbols of the naming convention. The generators drive
/// four of them; `16x9h` names are parsed and formatted but have no
/// generator mapping.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FovSymbol {
    Horizontal,
    Vertical,
    Diagonal,
    Clipped4x3,
    Clipped16x9,
}

impl FovSymbol {
    pub const ALL: [FovSymbol; 5] = [
        FovSymbol::Horizontal,
        FovSymbol::Vertical,
        FovSymbol::Diagonal,
        FovSymbol::Clipped4x3,
        FovSymbol::Clipped16x9,
    ];

    pub fn symbol(self) -> &'static str {
        match self {
            FovSymbol::Horizontal => "h",
            FovSymbol::Vertical => "v",
            FovSymbol::Diagonal => "d",
            FovSymbol::Clipped4x3 => "4x3h",
            FovSymbol::Clipped16x9 => "16x9h",
        }
    }
}

/// Perspective property group: FOV type with degrees plus the Universal
/// Perspective scalars.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerspectiveProperties {
    pub fov: FovSymbol,
    pub degrees: f64,
    pub k: f64,
    pub l: f64,
    pub s: f64,
}

/// Parsed form of a rasterization-map filename.
#[derive(Debug, Clone, PartialEq)]
pub struct MapFileDescriptor {
    pub description: String,
    pub layers: Vec<LayerKind>,
    pub properties: Option<PerspectiveProperties>,
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("invalid map filename at byte {position}: {message}")]
pub struct NameParseError {
    pub position: usize,
    pub message: String,
}

fn err(position: usize, message: impl Into<String>) -> NameParseError {
    NameParseError { position, message: message.into() }
}

/// Shortest decimal that round-trips through `f64` parsing.
fn fmt_num(v: f64) -> String {
    format!("{v}")
}

/// Formats a descriptor into its conventional filename.
pub fn format_map_filename(d: &MapFileDescriptor) -> String {
    let mut name = String::new();
    name.push_str(&d.description);
    name.push('_');
    if d.layers.len() == 1 {
        name.push_str(d.layers[0].symbol());
    } else {
        name.push('(');
        for (i, layer) in d.layers.iter().enumerate() {
            if i > 0 {
                name.push('_');
            }
            name.push_str(layer.symbol());
        }
        name.push(')');
    }
    if let Some(p) = &d.properties {
        name.push_str(&format!(
            "_({}{}_k{}_l{}_s{})",
            p.fov.symbol(),
            fmt_num(p.degrees),
            fmt_num(p.k),
            fmt_num(p.l),
            fmt_num(p.s)
        ));
    }
    name.push_str(".exr");
    name
}

/// Parses a conventional filename back into a descriptor; the exact inverse
/// of [`format_map_filename`]. Errors carry the byte position of the
/// offending token.
pub fn parse_map_filename(name: &str) -> Result<MapFileDescriptor, NameParseError> {
    let stem = name
        .strip_suffix(".exr")
        .ok_or_else(|| err(name.len().saturating_sub(4), "expected .exr extension"))?;

    // Underscore-separated tokens, with parenthesized groups kept atomic.
    let mut tokens: Vec<(usize, &str)> = Vec::new();
    let mut depth = 0usize;
    let mut start = 0usize;
    for (i, ch) in stem.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth = depth
                .checked_sub(1)
                .ok_or_else(|| err(i, "unbalanced closing parenthesis"))?,
            '_' if depth == 0 => {
                tokens.push((start, &stem[start..i]));
                start = i + 1;
            }
            _ => {}
        }
    }
    if depth != 0 {
        return Err(err(stem.len(), "unbalanced opening parenthesis"));
    }
    tokens.push((start, &stem[start..]));

    if tokens.len() < 2 {
        return Err(err(stem.len(), "missing layer group"));
    }
    if tokens.len() > 3 {
        return Err(err(tokens[3].0, "too many name groups"));
    }
    let description = tokens[0].1;
    if description.is_empty() {
        return Err(err(0, "empty description"));
    }
    if description.contains('(') {
        return Err(err(tokens[0].0, "description must not contain parentheses"));
    }

    let (layer_pos, layer_group) = tokens[1];
    let layers = parse_layer_group(layer_group, layer_pos)?;

    let properties = match tokens.get(2) {
        Some(&(pos, group)) => Some(parse_properties(group, pos)?),
        None => None,
    };

    Ok(MapFileDescriptor {
        description: description.to_string(),
        layers,
        properties,
    })
}

fn parse_layer_group(group: &str, pos: usize) -> Result<Vec<LayerKind>, NameParseError> {
    let (inner, inner_pos) = match group.strip_prefix('(').and_then(|g| g.strip_suffix(')')) {
        Some(inner) => (inner, pos + 1),
        None => (group, pos),
    };
    let mut layers = Vec::new();
    let mut offset = inner_pos;
    for part in inner.split('_') {
        let layer = LayerKind::from_symbol(part)
            .ok_or_else(|| err(offset, format!("unknown layer symbol {part:?}")))?;
        layers.push(layer);
        offset += part.len() + 1;
    }
    Ok(layers)
}

fn parse_properties(group: &str, pos: usize) -> Result<PerspectiveProperties, NameParseError> {
    let inner = group
        .strip_prefix('(')
        .and_then(|g| g.strip_suffix(')'))
        .ok_or_else(|| err(pos, "properties must be parenthesized"))?;
    let mut offset = pos + 1;
    let mut parts = inner.split('_');

    let fov_part = parts
        .next()
        .filter(|p| !p.is_empty())
        .ok_or_else(|| err(offset, "missing FOV property"))?;
    // Longest symbol first so `4x3h`/`16x9h` win over a bare `h` suffix.
    let mut symbols = FovSymbol::ALL;
    symbols.sort_by_key(|s| std::cmp::Reverse(s.symbol().len()));
    let fov = symbols
        .iter()
        .copied()
        .find(|s| fov_part.starts_with(s.symbol()))
        .ok_or_else(|| err(offset, format!("unknown FOV symbol in {fov_part:?}")))?;
    let degrees: f64 = fov_part[fov.symbol().len()..]
        .parse()
        .map_err(|_| err(offset + fov.symbol().len(), "invalid FOV degrees"))?;
    offset += fov_part.len() + 1;

    let mut scalar = |prefix: &str, parts: &mut std::str::Split<'_, char>| {
        let part = parts
            .next()
            .ok_or_else(|| err(offset, format!("missing {prefix} property")))?;
        let value: f64 = part
            .strip_prefix(prefix)
            .ok_or_else(|| err(offset, format!("expected {prefix} prefix in {part:?}")))?
            .parse()
            .map_err(|_| err(offset + prefix.len(), format!("invalid {prefix} value")))?;
        offset += part.len() + 1;
        Ok(value)
    };
    let k = scalar("k", &mut parts)?;
    let l = scalar("l", &mut parts)?;
    let s = scalar("s", &mut parts)?;
    if let Some(extra) = parts.next() {
        return Err(err(offset, format!("unexpected trailing property {extra:?}")));
    }
    Ok(PerspectiveProperties { fov, degrees, k, l, s })
}
