//! Curvilinear software rasterizer and rasterization-map toolkit.
//!
//! Three rasterization paths share one coverage model — a gradient-
//! normalized pixel-step function that turns edge distance into fractional
//! coverage at native resolution:
//!
//! - [`rmaa`]: rectilinear triangles with the pixel step baked into the
//!   normalized edge matrix;
//! - [`map_raster`]: triangles looked up through distortion STMaps or
//!   unit-sphere Perspective Maps, with derivatives estimated from the map;
//! - [`compositor`]: front-to-back merging of the resulting non-binary
//!   coverage masks.
//!
//! [`map_gen`] produces the lookup maps (Universal Perspective projections,
//! natural vignetting, lens distortion, conversions), and [`io`] reads and
//! writes them along with rendered images and scene files.

pub mod compositor;
pub mod geometry;
pub mod io;
pub mod map_gen;
pub mod map_raster;
pub mod maps;
pub mod math;
pub mod render;
pub mod rmaa;

pub use compositor::Framebuffer;
pub use geometry::{Triangle2, Triangle3, VertexData};
pub use maps::{MapKind, PerspectiveMap, STMap};
pub use math::{vec2, vec3, Vec2, Vec3};
pub use rmaa::{Fragment, RasterOptions, StepVariant};
