//! File formats: rasterization-map containers, the naming convention,
//! rendered-image encoding and scene input.

pub mod image_out;
pub mod map_file;
pub mod naming;
pub mod scene;

use thiserror::Error;

pub use image_out::{encode_channel, encode_framebuffer, read_image, write_image};
pub use map_file::{
    map_file_from_pmap, map_file_from_stmap, pmap_from_map_file, read_map_file,
    stmap_from_map_file, write_map_file, Layer, MapFile,
};
pub use naming::{
    format_map_filename, parse_map_filename, FovSymbol, LayerKind, MapFileDescriptor,
    NameParseError, PerspectiveProperties,
};
pub use scene::{load_scene, parse_scene, Scene};

#[derive(Debug, Error)]
pub enum IoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("EXR error: {0}")]
    Exr(#[from] exr::error::Error),
    #[error(transparent)]
    Map(#[from] crate::maps::MapError),
    #[error("image error: {0}")]
    Image(String),
    #[error("unsupported map extension {0:?} (use .exr or .rmap)")]
    UnsupportedExtension(String),
    #[error("unknown layer: {0}")]
    UnknownLayer(String),
    #[error("layer {layer} has {got} samples, expected {expected}")]
    LayerSize { layer: String, got: usize, expected: usize },
    #[error("corrupt map file: {0}")]
    Corrupt(&'static str),
    #[error("scene parse error at line {line}: {message}")]
    SceneParse { line: usize, message: String },
}
