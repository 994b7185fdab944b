//! File formats: WSSR rasters, colormapped PNGs and JSON manifests.

pub mod colormap;
pub mod manifest;
pub mod wssr;

pub use colormap::{
    decode_colormap_png, encode_colormap_png, load_png, save_png, ColormapLut, ColormapName,
};
pub use manifest::{load_manifest, save_manifest, DatasetManifest, ManifestEntry};
pub use wssr::{read_field, read_field_file, write_field, write_field_file, WssrHeader};
