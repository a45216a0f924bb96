//! Seam-carving forgery synthesis with exact ground-truth masks, and
//! localization metrics for evaluating detectors against them.

pub mod carver;
pub mod codec;
pub mod dataset;
pub mod energy;
mod error;
pub mod forgery;
pub mod metrics;
pub mod raster;

pub use carver::{Origin, ProvenanceGrid, Seam, Variant};
pub use error::{Error, Result};
pub use raster::{BitDepth, BitGrid, MaskKind, PixelMask, RasterImage, SeamMask, TileRegion};
