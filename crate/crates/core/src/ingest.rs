//! Building LR/HR benchmark pairs: chipping, decimation and rasterization of
//! scattered lat/lon records.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Field2D, FieldPair, ValueRange, VariableKind};
use crate::io::manifest::{resolve_entry_path, save_manifest, DatasetManifest, ManifestEntry};
use crate::io::wssr::write_field_file;

/// Maximum deviation of a coordinate axis from its fitted arithmetic
/// progression, in degrees.
pub const GRID_TOLERANCE_DEG: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScatteredPoint {
    pub lat: f64,
    pub lon: f64,
    pub value: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ScatteredPoints {
    pub records: Vec<ScatteredPoint>,
}

impl ScatteredPoints {
    pub fn new(records: Vec<ScatteredPoint>) -> Self {
        ScatteredPoints { records }
    }
}

/// Axis coordinates of a rasterized grid: latitudes north to south (row
/// order) and longitudes west to east (column order).
#[derive(Debug, Clone, PartialEq)]
pub struct GridCoords {
    pub lats: Vec<f64>,
    pub lons: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChipSpec {
    pub size: usize,
    pub stride: usize,
}

impl Default for ChipSpec {
    fn default() -> Self {
        ChipSpec {
            size: 100,
            stride: 100,
        }
    }
}

impl ChipSpec {
    pub fn new(size: usize, stride: usize) -> Result<Self> {
        let spec = ChipSpec { size, stride };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.size < 2 {
            return Err(Error::invalid(format!("chip size {} < 2", self.size)));
        }
        if self.stride < 1 {
            return Err(Error::invalid("chip stride must be at least 1"));
        }
        Ok(())
    }

    /// Number of full windows along an axis of length `len`.
    fn windows(&self, len: usize) -> usize {
        if len < self.size {
            0
        } else {
            (len - self.size) / self.stride + 1
        }
    }
}

/// A patch together with its position in the patch grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Chip {
    pub patch_row: usize,
    pub patch_col: usize,
    pub field: Field2D,
}

/// Tiles `f` into full `size × size` windows in row-major offset order.
/// Partial windows at the right and bottom edges are dropped.
pub fn chip_indexed(f: &Field2D, spec: ChipSpec) -> Result<Vec<Chip>> {
    spec.validate()?;
    if f.width() < spec.size || f.height() < spec.size {
        return Err(Error::FieldTooSmall {
            width: f.width(),
            height: f.height(),
            size: spec.size,
        });
    }
    let rows = spec.windows(f.height());
    let cols = spec.windows(f.width());
    let mut out = Vec::with_capacity(rows * cols);
    for pr in 0..rows {
        for pc in 0..cols {
            let (r0, c0) = (pr * spec.stride, pc * spec.stride);
            let mut values = Vec::with_capacity(spec.size * spec.size);
            for r in r0..r0 + spec.size {
                values.extend_from_slice(&f.row(r)[c0..c0 + spec.size]);
            }
            let field = Field2D::new(
                spec.size,
                spec.size,
                f.variable(),
                f.pixel_spacing_km(),
                values,
                f.declared_range(),
            )?;
            out.push(Chip {
                patch_row: pr,
                patch_col: pc,
                field,
            });
        }
    }
    Ok(out)
}

pub fn chip(f: &Field2D, spec: ChipSpec) -> Result<Vec<Field2D>> {
    Ok(chip_indexed(f, spec)?
        .into_iter()
        .map(|c| c.field)
        .collect())
}

/// Pure decimation: `LR(i, j) = HR(factor·i, factor·j)`.
pub fn coarsen_subsample(hr: &Field2D, factor: usize) -> Result<Field2D> {
    if factor < 2 {
        return Err(Error::invalid(format!("factor {factor} < 2")));
    }
    let w = hr.width().div_ceil(factor);
    let h = hr.height().div_ceil(factor);
    let mut values = Vec::with_capacity(w * h);
    for i in 0..h {
        let row = hr.row(i * factor);
        values.extend(row.iter().step_by(factor).copied());
    }
    Field2D::new(
        w,
        h,
        hr.variable(),
        hr.pixel_spacing_km() * factor as f64,
        values,
        hr.declared_range(),
    )
}

/// Distinct sorted values of one axis, checked against an arithmetic
/// progression.
/// Sorted axis positions; coordinates closer than the grid tolerance are
/// merged into one position (their mean).
fn regular_axis(mut raw: Vec<f64>, axis: &'static str) -> Result<Vec<f64>> {
    raw.sort_by(f64::total_cmp);
    let mut values = Vec::new();
    let mut group: Vec<f64> = Vec::new();
    for x in raw {
        if group
            .last()
            .is_some_and(|&last| x - last > GRID_TOLERANCE_DEG)
        {
            values.push(group.iter().sum::<f64>() / group.len() as f64);
            group.clear();
        }
        group.push(x);
    }
    values.push(group.iter().sum::<f64>() / group.len() as f64);
    let n = values.len();
    if n >= 3 {
        // least-squares fit of values[i] ≈ a + b·i
        let nf = n as f64;
        let mean_i = (nf - 1.0) / 2.0;
        let mean_x = values.iter().sum::<f64>() / nf;
        let (mut sxy, mut sxx) = (0.0, 0.0);
        for (i, x) in values.iter().enumerate() {
            let di = i as f64 - mean_i;
            sxy += di * (x - mean_x);
            sxx += di * di;
        }
        let b = sxy / sxx;
        let a = mean_x - b * mean_i;
        let worst = values
            .iter()
            .enumerate()
            .map(|(i, x)| (x - (a + b * i as f64)).abs())
            .fold(0.0, f64::max);
        if worst > GRID_TOLERANCE_DEG {
            return Err(Error::IrregularSpacing { axis });
        }
    }
    Ok(values)
}

fn nearest(axis: &[f64], x: f64) -> usize {
    let i = axis.partition_point(|&a| a < x);
    if i == axis.len() || (i > 0 && x - axis[i - 1] <= axis[i] - x) {
        i - 1
    } else {
        i
    }
}

pub fn rasterize_scattered_with_grid(
    pts: &ScatteredPoints,
    variable: VariableKind,
    pixel_spacing_km: f64,
) -> Result<(Field2D, GridCoords)> {
    if pts.records.is_empty() {
        return Err(Error::Empty("scattered points"));
    }
    for p in &pts.records {
        if !(p.lat.is_finite() && p.lon.is_finite() && p.value.is_finite()) {
            return Err(Error::invalid(format!(
                "non-finite record ({}, {}, {})",
                p.lat, p.lon, p.value
            )));
        }
    }
    let lats = regular_axis(pts.records.iter().map(|p| p.lat).collect(), "latitude")?;
    let lons = regular_axis(pts.records.iter().map(|p| p.lon).collect(), "longitude")?;
    let (h, w) = (lats.len(), lons.len());
    let mut values = vec![0.0; h * w];
    let mut filled = vec![false; h * w];
    for p in &pts.records {
        let li = nearest(&lats, p.lat);
        let ci = nearest(&lons, p.lon);
        // north at the top
        let cell = (h - 1 - li) * w + ci;
        if filled[cell] {
            return Err(Error::DuplicateCoordinate {
                lat: p.lat,
                lon: p.lon,
            });
        }
        filled[cell] = true;
        values[cell] = p.value;
    }
    if pts.records.len() != h * w {
        return Err(Error::IncompleteGrid {
            expected: h * w,
            actual: pts.records.len(),
        });
    }
    let field = Field2D::from_values(w, h, variable, pixel_spacing_km, values)?;
    let mut lats_desc = lats;
    lats_desc.reverse();
    Ok((
        field,
        GridCoords {
            lats: lats_desc,
            lons,
        },
    ))
}

pub fn rasterize_scattered(
    pts: &ScatteredPoints,
    variable: VariableKind,
    pixel_spacing_km: f64,
) -> Result<Field2D> {
    rasterize_scattered_with_grid(pts, variable, pixel_spacing_km).map(|(f, _)| f)
}

/// Row-major flattening back to lat/lon records.
pub fn flatten(f: &Field2D, grid: &GridCoords) -> Result<ScatteredPoints> {
    if grid.lats.len() != f.height() || grid.lons.len() != f.width() {
        return Err(Error::invalid("grid coordinates do not match field dims"));
    }
    let mut records = Vec::with_capacity(f.len());
    for (r, &lat) in grid.lats.iter().enumerate() {
        for (c, &lon) in grid.lons.iter().enumerate() {
            records.push(ScatteredPoint {
                lat,
                lon,
                value: f.get(r, c),
            });
        }
    }
    Ok(ScatteredPoints { records })
}

/// A built pair plus its manifest id.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetPair {
    pub id: String,
    pub pair: FieldPair,
}

pub fn entry_id(field_index: usize, patch_row: usize, patch_col: usize) -> String {
    format!("{field_index}_{patch_row}_{patch_col}")
}

/// Chips every field, decimates every chip, and assembles a manifest whose
/// entries point at `hr/<id>.wssr` and `lr/<id>.wssr`. Entries are sorted by
/// id. An empty input yields an empty manifest with range `[0, 1]`.
pub fn build_dataset(
    dataset_name: &str,
    hr_fields: &[Field2D],
    spec: ChipSpec,
    factor: usize,
) -> Result<(DatasetManifest, Vec<DatasetPair>)> {
    spec.validate()?;
    if factor < 2 {
        return Err(Error::invalid(format!("factor {factor} < 2")));
    }
    if let Some(first) = hr_fields.first() {
        for f in &hr_fields[1..] {
            if f.variable() != first.variable() || f.pixel_spacing_km() != first.pixel_spacing_km()
            {
                return Err(Error::invalid(
                    "all fields must share variable and pixel spacing",
                ));
            }
        }
    }

    let per_field: Vec<Vec<DatasetPair>> = hr_fields
        .par_iter()
        .enumerate()
        .map(|(fi, f)| {
            chip_indexed(f, spec)?
                .into_iter()
                .map(|c| {
                    let lr = coarsen_subsample(&c.field, factor)?;
                    Ok(DatasetPair {
                        id: entry_id(fi, c.patch_row, c.patch_col),
                        pair: FieldPair::new(lr, c.field, factor)?,
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let mut pairs: Vec<DatasetPair> = per_field.into_iter().flatten().collect();
    pairs.sort_by(|a, b| a.id.cmp(&b.id));

    let global_range = if pairs.is_empty() {
        ValueRange::new(0.0, 1.0)
    } else {
        let r = pairs
            .iter()
            .map(|p| p.pair.hr.data_range())
            .reduce(|a, b| a.union(&b))
            .unwrap();
        if r.min >= r.max {
            return Err(Error::DegenerateRange {
                min: r.min,
                max: r.max,
            });
        }
        r
    };

    let (variable, spacing) = hr_fields
        .first()
        .map(|f| (f.variable(), f.pixel_spacing_km()))
        .unwrap_or((VariableKind::Generic, 1.0));
    let manifest = DatasetManifest {
        dataset_name: dataset_name.to_string(),
        variable,
        pixel_spacing_km: spacing,
        factor,
        global_range,
        entries: pairs
            .iter()
            .map(|p| ManifestEntry {
                id: p.id.clone(),
                hr_path: format!("hr/{}.wssr", p.id),
                lr_path: format!("lr/{}.wssr", p.id),
            })
            .collect(),
    };
    manifest.validate()?;
    Ok((manifest, pairs))
}

/// Writes `manifest.json` and every HR/LR raster under `dir`, returning the
/// manifest path.
pub fn save_dataset(
    dir: impl AsRef<Path>,
    manifest: &DatasetManifest,
    pairs: &[DatasetPair],
) -> Result<PathBuf> {
    let dir = dir.as_ref();
    for sub in ["hr", "lr"] {
        let p = dir.join(sub);
        fs::create_dir_all(&p).map_err(|e| Error::io(&p, e))?;
    }
    for (entry, p) in manifest.entries.iter().zip(pairs) {
        write_field_file(&p.pair.hr, resolve_entry_path(dir, &entry.hr_path))?;
        write_field_file(&p.pair.lr, resolve_entry_path(dir, &entry.lr_path))?;
    }
    let path = dir.join("manifest.json");
    save_manifest(manifest, &path)?;
    Ok(path)
}
