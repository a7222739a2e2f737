//! Map file container: named float layers plus string attributes.
//!
//! The primary container is OpenEXR with 32-bit float channels; camera and
//! generator parameters travel as string attributes. A raw fallback
//! container (`.rmap`: header plus little-endian payload) carries the same
//! model for environments without EXR support. Vignette and bounds-mask
//! single layers are stored 8-bit (quantized to 256 levels, promoted to
//! float on read); everything else is `f32` and round-trips bit-exact.

use super::naming::LayerKind;
use super::IoError;
use crate::maps::{check_resolution, MapKind, MapMetadata, PerspectiveMap, STMap};
use crate::math::{vec2, vec3};
use std::collections::HashMap;
use std::io::{Read, Write};
use std::path::Path;

/// One named layer of interleaved samples (`kind.channels()` per texel).
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub kind: LayerKind,
    pub samples: Vec<f32>,
}

/// In-memory form of a rasterization-map file.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MapFile {
    pub width: u32,
    pub height: u32,
    pub layers: Vec<Layer>,
    pub attributes: Vec<(String, String)>,
}

/// Attribute recording the layer list, so files read back unambiguously.
const LAYERS_ATTRIBUTE: &str = "rastermap:layers";

/// Quantization applied to 8-bit layers.
fn quantize_8bit(v: f32) -> f32 {
    (v.clamp(0.0, 1.0) * 255.0).round() / 255.0
}

impl MapFile {
    pub fn layer(&self, kind: LayerKind) -> Option<&Layer> {
        self.layers.iter().find(|l| l.kind == kind)
    }

    fn texel_count(&self) -> usize {
        (self.width * self.height) as usize
    }
}

/// Container selected by file extension.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Container {
    Exr,
    Raw,
}

fn container_for(path: &Path) -> Result<Container, IoError> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("exr") => Ok(Container::Exr),
        Some("rmap") => Ok(Container::Raw),
        other => Err(IoError::UnsupportedExtension(
            other.unwrap_or("<none>").to_string(),
        )),
    }
}

/// Writes a map file; `.exr` or the raw `.rmap` fallback by extension.
pub fn write_map_file(path: impl AsRef<Path>, file: &MapFile) -> Result<(), IoError> {
    let path = path.as_ref();
    check_resolution(file.width, file.height)?;
    for layer in &file.layers {
        let expected = file.texel_count() * layer.kind.channels();
        if layer.samples.len() != expected {
            return Err(IoError::LayerSize {
                layer: layer.kind.symbol().to_string(),
                got: layer.samples.len(),
                expected,
            });
        }
    }
    let mut prepared = file.clone();
    for layer in &mut prepared.layers {
        if layer.kind.stored_8bit() {
            for v in &mut layer.samples {
                *v = quantize_8bit(*v);
            }
        }
    }
    let symbols: Vec<&str> = prepared.layers.iter().map(|l| l.kind.symbol()).collect();
    let joined = symbols.join("_");
    if !prepared
        .attributes
        .iter()
        .any(|(k, _)| k == LAYERS_ATTRIBUTE)
    {
        prepared.attributes.push((LAYERS_ATTRIBUTE.into(), joined));
    }
    match container_for(path)? {
        Container::Exr => write_exr(path, &prepared),
        Container::Raw => write_raw(path, &prepared),
    }
}

/// Reads a map file written by [`write_map_file`].
pub fn read_map_file(path: impl AsRef<Path>) -> Result<MapFile, IoError> {
    let path = path.as_ref();
    let mut file = match container_for(path)? {
        Container::Exr => read_exr(path),
        Container::Raw => read_raw(path),
    }?;
    check_resolution(file.width, file.height)?;
    file.attributes.retain(|(k, _)| k != LAYERS_ATTRIBUTE);
    Ok(file)
}

/// Channel names for a layer: plain `R/G/B/A` for single-layer files,
/// symbol-prefixed otherwise.
fn channel_names(kind: LayerKind, qualified: bool) -> Vec<String> {
    let base = ["R", "G", "B", "A"];
    (0..kind.channels())
        .map(|c| {
            if qualified {
                format!("{}.{}", kind.symbol(), base[c])
            } else {
                base[c].to_string()
            }
        })
        .collect()
}

fn write_exr(path: &Path, file: &MapFile) -> Result<(), IoError> {
    use exr::prelude as ep;

    let qualified = file.layers.len() > 1;
    let mut list = Vec::new();
    for layer in &file.layers {
        let names = channel_names(layer.kind, qualified);
        let channels = layer.kind.channels();
        for (c, name) in names.iter().enumerate() {
            let plane: Vec<f32> = layer
                .samples
                .chunks_exact(channels)
                .map(|texel| texel[c])
                .collect();
            list.push(ep::AnyChannel::new(name.as_str(), ep::FlatSamples::F32(plane)));
        }
    }
    let layer = ep::Layer::new(
        (file.width as usize, file.height as usize),
        ep::LayerAttributes::named("rastermap"),
        ep::Encoding::SMALL_LOSSLESS,
        ep::AnyChannels::sort(list.into()),
    );
    let mut image = ep::Image::from_layer(layer);
    for (key, value) in &file.attributes {
        image.attributes.other.insert(
            ep::Text::new_or_panic(key.as_str()),
            exr::meta::attribute::AttributeValue::Text(ep::Text::new_or_panic(value.as_str())),
        );
    }
    ep::WritableImage::write(&image).to_file(path)?;
    Ok(())
}

fn read_exr(path: &Path) -> Result<MapFile, IoError> {
    use exr::prelude::{ReadChannels as _, ReadLayers as _};

    let image = exr::prelude::read()
        .no_deep_data()
        .largest_resolution_level()
        .all_channels()
        .first_valid_layer()
        .all_attributes()
        .from_file(path)?;

    let size = image.layer_data.size;
    let (width, height) = (size.width() as u32, size.height() as u32);
    let texels = (width * height) as usize;

    // Custom attributes of a single-part file surface on the layer; older
    // writers may also put them on the image. Merge both.
    let mut attributes = Vec::new();
    for map in [&image.attributes.other, &image.layer_data.attributes.other] {
        for (key, value) in map {
            if let exr::meta::attribute::AttributeValue::Text(text) = value {
                attributes.push((key.to_string(), text.to_string()));
            }
        }
    }
    attributes.sort();
    attributes.dedup();

    let layers_attr = attributes
        .iter()
        .find(|(k, _)| k == LAYERS_ATTRIBUTE)
        .map(|(_, v)| v.clone())
        .ok_or_else(|| IoError::UnknownLayer("missing layer attribute".into()))?;

    let mut planes: HashMap<String, Vec<f32>> = HashMap::new();
    for channel in &image.layer_data.channel_data.list {
        let data: Vec<f32> = channel.sample_data.values_as_f32().collect();
        planes.insert(channel.name.to_string(), data);
    }

    let mut layers = Vec::new();
    let symbols: Vec<&str> = layers_attr.split('_').collect();
    let qualified = symbols.len() > 1;
    for symbol in symbols {
        let kind = LayerKind::from_symbol(symbol)
            .ok_or_else(|| IoError::UnknownLayer(symbol.to_string()))?;
        let names = channel_names(kind, qualified);
        let channels = kind.channels();
        let mut samples = vec![0.0f32; texels * channels];
        for (c, name) in names.iter().enumerate() {
            let plane = planes
                .get(name)
                .ok_or_else(|| IoError::UnknownLayer(format!("missing channel {name}")))?;
            if plane.len() != texels {
                return Err(IoError::LayerSize {
                    layer: name.clone(),
                    got: plane.len(),
                    expected: texels,
                });
            }
            for (i, &v) in plane.iter().enumerate() {
                samples[i * channels + c] = v;
            }
        }
        layers.push(Layer { kind, samples });
    }

    Ok(MapFile { width, height, layers, attributes })
}

const RAW_MAGIC: &[u8; 4] = b"RMAP";
const RAW_VERSION: u16 = 1;

fn write_raw(path: &Path, file: &MapFile) -> Result<(), IoError> {
    let mut out = Vec::new();
    out.extend_from_slice(RAW_MAGIC);
    out.extend_from_slice(&RAW_VERSION.to_le_bytes());
    out.extend_from_slice(&file.width.to_le_bytes());
    out.extend_from_slice(&file.height.to_le_bytes());
    out.extend_from_slice(&(file.layers.len() as u16).to_le_bytes());
    out.extend_from_slice(&(file.attributes.len() as u16).to_le_bytes());
    for layer in &file.layers {
        let symbol = layer.kind.symbol().as_bytes();
        out.push(symbol.len() as u8);
        out.extend_from_slice(symbol);
        if layer.kind.stored_8bit() {
            out.push(1);
            out.extend(layer.samples.iter().map(|&v| (v * 255.0).round() as u8));
        } else {
            out.push(0);
            for v in &layer.samples {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
    }
    for (key, value) in &file.attributes {
        for text in [key, value] {
            out.extend_from_slice(&(text.len() as u16).to_le_bytes());
            out.extend_from_slice(text.as_bytes());
        }
    }
    std::fs::File::create(path)?.write_all(&out)?;
    Ok(())
}

fn read_raw(path: &Path) -> Result<MapFile, IoError> {
    fn take<'a>(bytes: &'a [u8], cursor: &mut usize, n: usize) -> Result<&'a [u8], IoError> {
        let end = *cursor + n;
        let slice = bytes
            .get(*cursor..end)
            .ok_or(IoError::Corrupt("truncated raw map file"))?;
        *cursor = end;
        Ok(slice)
    }
    fn take_str(bytes: &[u8], cursor: &mut usize, n: usize) -> Result<String, IoError> {
        Ok(std::str::from_utf8(take(bytes, cursor, n)?)
            .map_err(|_| IoError::Corrupt("non-utf8 text in raw map file"))?
            .to_string())
    }

    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    let c = &mut 0usize;

    if take(&bytes, c, 4)? != RAW_MAGIC {
        return Err(IoError::Corrupt("bad raw map magic"));
    }
    let version = u16::from_le_bytes(take(&bytes, c, 2)?.try_into().unwrap());
    if version != RAW_VERSION {
        return Err(IoError::Corrupt("unsupported raw map version"));
    }
    let width = u32::from_le_bytes(take(&bytes, c, 4)?.try_into().unwrap());
    let height = u32::from_le_bytes(take(&bytes, c, 4)?.try_into().unwrap());
    let layer_count = u16::from_le_bytes(take(&bytes, c, 2)?.try_into().unwrap());
    let attr_count = u16::from_le_bytes(take(&bytes, c, 2)?.try_into().unwrap());
    let texels = (width as usize) * (height as usize);

    let mut layers = Vec::new();
    for _ in 0..layer_count {
        let len = take(&bytes, c, 1)?[0] as usize;
        let symbol = take_str(&bytes, c, len)?;
        let kind = LayerKind::from_symbol(&symbol).ok_or(IoError::UnknownLayer(symbol))?;
        let dtype = take(&bytes, c, 1)?[0];
        let n = texels * kind.channels();
        let samples = match dtype {
            0 => take(&bytes, c, n * 4)?
                .chunks_exact(4)
                .map(|b| f32::from_le_bytes(b.try_into().unwrap()))
                .collect(),
            1 => take(&bytes, c, n)?.iter().map(|&b| b as f32 / 255.0).collect(),
            _ => return Err(IoError::Corrupt("unknown layer data type")),
        };
        layers.push(Layer { kind, samples });
    }

    let mut attributes = Vec::new();
    for _ in 0..attr_count {
        let klen = u16::from_le_bytes(take(&bytes, c, 2)?.try_into().unwrap()) as usize;
        let key = take_str(&bytes, c, klen)?;
        let vlen = u16::from_le_bytes(take(&bytes, c, 2)?.try_into().unwrap()) as usize;
        let value = take_str(&bytes, c, vlen)?;
        attributes.push((key, value));
    }

    Ok(MapFile { width, height, layers, attributes })
}

fn metadata_to_attributes(meta: &MapMetadata) -> Vec<(String, String)> {
    meta.0.clone()
}

/// Packs an STMap into file layers: `St`/`uSt` plus a bounds-mask layer
/// when any texel is masked.
pub fn map_file_from_stmap(map: &STMap) -> MapFile {
    let kind = match map.kind {
        MapKind::Distort => LayerKind::St,
        MapKind::Undistort => LayerKind::USt,
    };
    let mut layers = vec![Layer {
        kind,
        samples: map.texels().iter().flatten().copied().collect(),
    }];
    if !map.all_valid() {
        layers.push(Layer { kind: LayerKind::M, samples: map.mask().to_vec() });
    }
    MapFile {
        width: map.width(),
        height: map.height(),
        layers,
        attributes: metadata_to_attributes(&map.metadata),
    }
}

/// Reconstructs an STMap from a map file containing an `St` or `uSt` layer.
pub fn stmap_from_map_file(file: &MapFile) -> Result<STMap, IoError> {
    let (layer, kind) = if let Some(l) = file.layer(LayerKind::St) {
        (l, MapKind::Distort)
    } else if let Some(l) = file.layer(LayerKind::USt) {
        (l, MapKind::Undistort)
    } else if let Some(l) = file.layer(LayerKind::StM) {
        (l, MapKind::Distort)
    } else {
        return Err(IoError::UnknownLayer("no STMap layer in file".into()));
    };
    let mut map = STMap::new(file.width, file.height, kind)?;
    let channels = layer.kind.channels();
    for y in 0..file.height {
        for x in 0..file.width {
            let i = ((y * file.width + x) as usize) * channels;
            map.set(
                x,
                y,
                vec2(layer.samples[i] as f64, layer.samples[i + 1] as f64),
            );
            if channels >= 3 {
                map.set_mask(x, y, layer.samples[i + 2]);
            }
        }
    }
    if let Some(mask) = file.layer(LayerKind::M) {
        for y in 0..file.height {
            for x in 0..file.width {
                map.set_mask(x, y, mask.samples[(y * file.width + x) as usize]);
            }
        }
    }
    map.metadata = MapMetadata(file.attributes.clone());
    Ok(map)
}

/// Packs a Perspective Map into file layers: `PmV` when a vignette channel
/// is present, `Pm` otherwise, plus a bounds-mask layer when needed.
pub fn map_file_from_pmap(map: &PerspectiveMap) -> MapFile {
    let mut layers = Vec::new();
    match map.vignette() {
        Some(v) => {
            let mut samples = Vec::with_capacity(v.len() * 4);
            for (dir, &vig) in map.dirs().iter().zip(v) {
                samples.extend_from_slice(dir);
                samples.push(vig);
            }
            layers.push(Layer { kind: LayerKind::PmV, samples });
        }
        None => layers.push(Layer {
            kind: LayerKind::Pm,
            samples: map.dirs().iter().flatten().copied().collect(),
        }),
    }
    if !map.all_valid() {
        layers.push(Layer { kind: LayerKind::M, samples: map.mask().to_vec() });
    }
    MapFile {
        width: map.width(),
        height: map.height(),
        layers,
        attributes: metadata_to_attributes(&map.metadata),
    }
}

/// Reconstructs a Perspective Map from a map file containing a `Pm`-family
/// layer.
pub fn pmap_from_map_file(file: &MapFile) -> Result<PerspectiveMap, IoError> {
    let (layer, has_vignette) = if let Some(l) = file.layer(LayerKind::PmV) {
        (l, true)
    } else if let Some(l) = file.layer(LayerKind::Pm) {
        (l, false)
    } else if let Some(l) = file.layer(LayerKind::PmM) {
        (l, false)
    } else {
        return Err(IoError::UnknownLayer("no Perspective Map layer in file".into()));
    };
    let mut map = PerspectiveMap::new(file.width, file.height, has_vignette)?;
    let channels = layer.kind.channels();
    for y in 0..file.height {
        for x in 0..file.width {
            let i = ((y * file.width + x) as usize) * channels;
            map.set(
                x,
                y,
                vec3(
                    layer.samples[i] as f64,
                    layer.samples[i + 1] as f64,
                    layer.samples[i + 2] as f64,
                ),
            );
            if layer.kind == LayerKind::PmV {
                map.set_vignette(x, y, layer.samples[i + 3]);
            }
            if layer.kind == LayerKind::PmM {
                map.set_mask(x, y, layer.samples[i + 3]);
            }
        }
    }
    if let Some(mask) = file.layer(LayerKind::M) {
        for y in 0..file.height {
            for x in 0..file.width {
                map.set_mask(x, y, mask.samples[(y * file.width + x) as usize]);
            }
        }
    }
    map.metadata = MapMetadata(file.attributes.clone());
    Ok(map)
}
