//! WSSR: a lossless little-endian raster container.
//!
//! ```text
//! offset size  field
//!      0    4  magic "WSSR"
//!      4    2  version (u16) = 1
//!      6    4  width (u32)
//!     10    4  height (u32)
//!     14    1  variable id (u8)
//!     15    4  pixel spacing km (f32)
//!     19    8  range min (f64)
//!     27    8  range max (f64)
//!     35  4wh  payload, f32 row-major, top row first
//! ```

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::field::{Field2D, ValueRange, VariableKind};

pub const MAGIC: [u8; 4] = *b"WSSR";
pub const VERSION: u16 = 1;
pub const HEADER_LEN: usize = 35;
pub const EXTENSION: &str = "wssr";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WssrHeader {
    pub width: u32,
    pub height: u32,
    pub variable: VariableKind,
    pub pixel_spacing_km: f32,
    pub range_min: f64,
    pub range_max: f64,
}

impl WssrHeader {
    pub fn to_bytes(&self) -> [u8; HEADER_LEN] {
        let mut b = [0u8; HEADER_LEN];
        b[0..4].copy_from_slice(&MAGIC);
        b[4..6].copy_from_slice(&VERSION.to_le_bytes());
        b[6..10].copy_from_slice(&self.width.to_le_bytes());
        b[10..14].copy_from_slice(&self.height.to_le_bytes());
        b[14] = self.variable.id();
        b[15..19].copy_from_slice(&self.pixel_spacing_km.to_le_bytes());
        b[19..27].copy_from_slice(&self.range_min.to_le_bytes());
        b[27..35].copy_from_slice(&self.range_max.to_le_bytes());
        b
    }

    pub fn parse(b: &[u8]) -> Result<Self> {
        if b.len() < HEADER_LEN {
            // a short stream with the wrong magic is still a magic error
            if b.len() >= 4 && b[0..4] != MAGIC {
                return Err(Error::BadMagic);
            }
            return Err(Error::Truncated {
                expected: HEADER_LEN,
                actual: b.len(),
            });
        }
        if b[0..4] != MAGIC {
            return Err(Error::BadMagic);
        }
        let version = u16::from_le_bytes([b[4], b[5]]);
        if version != VERSION {
            return Err(Error::UnsupportedVersion(version));
        }
        let u32_at = |o: usize| u32::from_le_bytes(b[o..o + 4].try_into().unwrap());
        let f64_at = |o: usize| f64::from_le_bytes(b[o..o + 8].try_into().unwrap());
        let variable = VariableKind::from_id(b[14])
            .ok_or_else(|| Error::InvalidField(format!("unknown variable id {}", b[14])))?;
        Ok(WssrHeader {
            width: u32_at(6),
            height: u32_at(10),
            variable,
            pixel_spacing_km: f32::from_le_bytes(b[15..19].try_into().unwrap()),
            range_min: f64_at(19),
            range_max: f64_at(27),
        })
    }

    pub fn payload_len(&self) -> usize {
        4 * self.width as usize * self.height as usize
    }
}

/// Serializes `f`. Values are stored as f32; the stored range is widened if
/// f32 rounding moves a value past the declared bounds.
pub fn write_field<W: Write>(f: &Field2D, mut out: W) -> Result<()> {
    let narrowed: Vec<f32> = f.values().iter().map(|&v| v as f32).collect();
    let mut range = f.declared_range();
    for &v in &narrowed {
        range.min = range.min.min(v as f64);
        range.max = range.max.max(v as f64);
    }
    let header = WssrHeader {
        width: dim_u32(f.width())?,
        height: dim_u32(f.height())?,
        variable: f.variable(),
        pixel_spacing_km: f.pixel_spacing_km() as f32,
        range_min: range.min,
        range_max: range.max,
    };
    let mut buf = Vec::with_capacity(HEADER_LEN + header.payload_len());
    buf.extend_from_slice(&header.to_bytes());
    for v in narrowed {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    out.write_all(&buf)?;
    out.flush()?;
    Ok(())
}

fn dim_u32(d: usize) -> Result<u32> {
    u32::try_from(d).map_err(|_| Error::InvalidField(format!("dimension {d} exceeds u32")))
}

pub fn read_field<R: Read>(mut input: R) -> Result<Field2D> {
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes)?;
    decode(&bytes)
}

pub fn encode(f: &Field2D) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    write_field(f, &mut buf)?;
    Ok(buf)
}

pub fn decode(bytes: &[u8]) -> Result<Field2D> {
    let header = WssrHeader::parse(bytes)?;
    let payload = &bytes[HEADER_LEN..];
    let expected = header.payload_len();
    if payload.len() < expected {
        return Err(Error::Truncated {
            expected,
            actual: payload.len(),
        });
    }
    if payload.len() > expected {
        return Err(Error::InvalidField(format!(
            "{} trailing bytes after payload",
            payload.len() - expected
        )));
    }
    let mut values = Vec::with_capacity(expected / 4);
    for (i, chunk) in payload.chunks_exact(4).enumerate() {
        let v = f32::from_le_bytes(chunk.try_into().unwrap());
        if !v.is_finite() {
            return Err(Error::NonFinite(i));
        }
        values.push(v as f64);
    }
    Field2D::new(
        header.width as usize,
        header.height as usize,
        header.variable,
        header.pixel_spacing_km as f64,
        values,
        ValueRange::new(header.range_min, header.range_max),
    )
}

pub fn write_field_file(f: &Field2D, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_field(f, BufWriter::new(file))
}

pub fn read_field_file(path: impl AsRef<Path>) -> Result<Field2D> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_field(BufReader::new(file))
}
