//! Colormapped PNG codec over 256-entry RGB lookup tables.

use std::collections::HashMap;
use std::path::Path;

use image::{Rgb, RgbImage};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::field::{Field2D, ValueRange, VariableKind};

static VIRIDIS: &[u8; 768] = include_bytes!("luts/viridis.rgb");
static INFERNO: &[u8; 768] = include_bytes!("luts/inferno.rgb");

pub const VIRIDIS_SHA256: &str = "fd2dee4b219dec3b680d044ee2c5b97b46afdcad1b1191d07544de048fb30c70";
pub const INFERNO_SHA256: &str = "e24e8bd38b972989f64c42856b2b274df5ada3a62bc01bf8e83500a2ea938ad4";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColormapName {
    Viridis,
    Inferno,
    Custom,
}

impl ColormapName {
    /// Wind variables are published with Viridis, solar with Inferno.
    pub fn for_variable(kind: VariableKind) -> Self {
        match kind {
            VariableKind::Dni | VariableKind::Dhi => ColormapName::Inferno,
            _ => ColormapName::Viridis,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColormapLut {
    name: ColormapName,
    entries: Vec<[u8; 3]>,
}

impl ColormapLut {
    /// Validates 256 distinct entries.
    pub fn new(name: ColormapName, entries: Vec<[u8; 3]>) -> Result<Self> {
        if entries.len() != 256 {
            return Err(Error::invalid(format!(
                "colormap needs 256 entries, got {}",
                entries.len()
            )));
        }
        let mut seen = HashMap::with_capacity(256);
        for (i, e) in entries.iter().enumerate() {
            if let Some(j) = seen.insert(*e, i) {
                return Err(Error::invalid(format!(
                    "colormap entries {j} and {i} are both {e:?}"
                )));
            }
        }
        Ok(ColormapLut { name, entries })
    }

    pub fn viridis() -> Self {
        Self::vendored(ColormapName::Viridis, VIRIDIS)
    }

    pub fn inferno() -> Self {
        Self::vendored(ColormapName::Inferno, INFERNO)
    }

    pub fn by_name(name: ColormapName) -> Option<Self> {
        match name {
            ColormapName::Viridis => Some(Self::viridis()),
            ColormapName::Inferno => Some(Self::inferno()),
            ColormapName::Custom => None,
        }
    }

    fn vendored(name: ColormapName, raw: &[u8; 768]) -> Self {
        let entries = raw.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect();
        ColormapLut { name, entries }
    }

    pub fn name(&self) -> ColormapName {
        self.name
    }

    pub fn entries(&self) -> &[[u8; 3]] {
        &self.entries
    }

    pub fn sha256_hex(&self) -> String {
        let flat: Vec<u8> = self.entries.iter().flatten().copied().collect();
        hex::encode(Sha256::digest(&flat))
    }

    /// Nearest entry by squared RGB distance; ties go to the lowest index.
    pub fn nearest_index(&self, rgb: [u8; 3]) -> usize {
        let mut best = 0;
        let mut best_d = u32::MAX;
        for (i, e) in self.entries.iter().enumerate() {
            let d: u32 = (0..3)
                .map(|c| {
                    let diff = e[c] as i32 - rgb[c] as i32;
                    (diff * diff) as u32
                })
                .sum();
            if d < best_d {
                best_d = d;
                best = i;
                if d == 0 {
                    break;
                }
            }
        }
        best
    }
}

fn check_range(range: ValueRange) -> Result<()> {
    if !(range.min.is_finite() && range.max.is_finite() && range.min < range.max) {
        return Err(Error::DegenerateRange {
            min: range.min,
            max: range.max,
        });
    }
    Ok(())
}

/// LUT index for `v`: `round(255 · clamp((v − min)/(max − min), 0, 1))`,
/// rounding half away from zero.
pub fn quantize(v: f64, range: ValueRange) -> usize {
    let t = ((v - range.min) / (range.max - range.min)).clamp(0.0, 1.0);
    (255.0 * t).round() as usize
}

pub fn dequantize(index: usize, range: ValueRange) -> f64 {
    let v = range.min + (index as f64 / 255.0) * (range.max - range.min);
    v.clamp(range.min, range.max)
}

pub fn encode_colormap_png(f: &Field2D, lut: &ColormapLut, range: ValueRange) -> Result<RgbImage> {
    check_range(range)?;
    let mut img = RgbImage::new(f.width() as u32, f.height() as u32);
    for (i, px) in img.pixels_mut().enumerate() {
        *px = Rgb(lut.entries[quantize(f.values()[i], range)]);
    }
    Ok(img)
}

pub fn decode_colormap_png(
    img: &RgbImage,
    lut: &ColormapLut,
    range: ValueRange,
    variable: VariableKind,
    pixel_spacing_km: f64,
) -> Result<Field2D> {
    check_range(range)?;
    let mut cache: HashMap<[u8; 3], usize> = lut
        .entries
        .iter()
        .enumerate()
        .map(|(i, e)| (*e, i))
        .collect();
    let values = img
        .pixels()
        .map(|p| {
            let idx = *cache.entry(p.0).or_insert_with(|| lut.nearest_index(p.0));
            dequantize(idx, range)
        })
        .collect();
    Field2D::new(
        img.width() as usize,
        img.height() as usize,
        variable,
        pixel_spacing_km,
        values,
        range,
    )
}

pub fn save_png(img: &RgbImage, path: impl AsRef<Path>) -> Result<()> {
    img.save_with_format(path.as_ref(), image::ImageFormat::Png)?;
    Ok(())
}

pub fn load_png(path: impl AsRef<Path>) -> Result<RgbImage> {
    Ok(image::open(path.as_ref())?.into_rgb8())
}
