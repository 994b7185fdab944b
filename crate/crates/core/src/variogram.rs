//! Omnidirectional normalized semivariograms (Matheron estimator).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{field_stats, Field2D};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Semivariogram {
    /// Bin centers.
    pub radii_km: Vec<f64>,
    /// γ(r) divided by the sill.
    pub gamma: Vec<f64>,
    pub pair_counts: Vec<u64>,
    pub sill: f64,
    pub bin_width_km: f64,
}

/// Lag offset `(dx, dy)` with its distance and radius bin.
#[derive(Debug, Clone, Copy)]
struct Lag {
    dx: isize,
    dy: usize,
    bin: usize,
}

/// One representative per unordered pair direction: `dy > 0`, or `dy == 0`
/// and `dx > 0`.
fn lags(spacing_km: f64, max_radius_km: f64, bin_width_km: f64, w: usize, h: usize) -> Vec<Lag> {
    let reach = (max_radius_km / spacing_km).floor() as isize;
    let mut out = Vec::new();
    for dy in 0..=reach.min(h as isize - 1) {
        for dx in -reach.min(w as isize - 1)..=reach.min(w as isize - 1) {
            if dy == 0 && dx <= 0 {
                continue;
            }
            let r = lag_distance(spacing_km, dx, dy as usize);
            if r <= max_radius_km {
                out.push(Lag {
                    dx,
                    dy: dy as usize,
                    bin: (r / bin_width_km).floor() as usize,
                });
            }
        }
    }
    out
}

#[inline]
pub(crate) fn lag_distance(spacing_km: f64, dx: isize, dy: usize) -> f64 {
    spacing_km * ((dx * dx) as f64 + (dy * dy) as f64).sqrt()
}

fn check_args(f: &Field2D, max_radius_km: f64, bin_width_km: f64) -> Result<()> {
    if f.len() < 2 {
        return Err(Error::invalid("semivariogram needs at least 2 pixels"));
    }
    if !(bin_width_km > 0.0 && max_radius_km >= bin_width_km && max_radius_km.is_finite()) {
        return Err(Error::invalid(format!(
            "need max radius {max_radius_km} >= bin width {bin_width_km} > 0"
        )));
    }
    Ok(())
}

/// Builds the normalized series from per-bin sums of `½Δ²` and pair counts.
pub(crate) fn finish(sums: &[f64], counts: &[u64], sill: f64, bin_width_km: f64) -> Semivariogram {
    let mut out = Semivariogram {
        radii_km: Vec::new(),
        gamma: Vec::new(),
        pair_counts: Vec::new(),
        sill,
        bin_width_km,
    };
    for (m, (&s, &n)) in sums.iter().zip(counts).enumerate() {
        if n == 0 {
            continue;
        }
        out.radii_km.push((m as f64 + 0.5) * bin_width_km);
        out.gamma.push(s / n as f64 / sill);
        out.pair_counts.push(n);
    }
    out
}

pub(crate) fn bin_count(max_radius_km: f64, bin_width_km: f64) -> usize {
    (max_radius_km / bin_width_km).floor() as usize + 1
}

/// Exhaustive lag enumeration: for every offset within `max_radius_km`, all
/// in-bounds pairs contribute `½(z(p+h) − z(p))²` to the bin
/// `[m·width, (m+1)·width)` containing `|h|`. Empty bins are omitted and γ is
/// divided by the field's population variance.
pub fn semivariogram(f: &Field2D, max_radius_km: f64, bin_width_km: f64) -> Result<Semivariogram> {
    check_args(f, max_radius_km, bin_width_km)?;
    let sill = field_stats(f).variance;
    if sill <= 0.0 {
        return Err(Error::ZeroSill);
    }
    let (w, h) = f.dims();
    let nbins = bin_count(max_radius_km, bin_width_km);
    let mut sums = vec![0.0; nbins];
    let mut counts = vec![0u64; nbins];
    for lag in lags(f.pixel_spacing_km(), max_radius_km, bin_width_km, w, h) {
        let (c_lo, c_hi) = if lag.dx >= 0 {
            (0, w - lag.dx as usize)
        } else {
            (lag.dx.unsigned_abs(), w)
        };
        let mut s = 0.0;
        for r in 0..h - lag.dy {
            let a = f.row(r);
            let b = f.row(r + lag.dy);
            for c in c_lo..c_hi {
                let d = b[(c as isize + lag.dx) as usize] - a[c];
                s += 0.5 * d * d;
            }
        }
        sums[lag.bin] += s;
        counts[lag.bin] += ((h - lag.dy) * (c_hi - c_lo)) as u64;
    }
    Ok(finish(&sums, &counts, sill, bin_width_km))
}

/// Pair-count-weighted mean of normalized γ per bin.
pub fn average_semivariograms(list: &[Semivariogram]) -> Result<Semivariogram> {
    let first = list.first().ok_or(Error::Empty("semivariograms"))?;
    for v in &list[1..] {
        if v.radii_km != first.radii_km {
            return Err(Error::MismatchedGrids(format!(
                "{} vs {} radius bins",
                first.radii_km.len(),
                v.radii_km.len()
            )));
        }
    }
    let bins = first.radii_km.len();
    let mut weighted = vec![0.0; bins];
    let mut counts = vec![0u64; bins];
    let mut sill = 0.0;
    for v in list {
        for i in 0..bins {
            weighted[i] += v.gamma[i] * v.pair_counts[i] as f64;
            counts[i] += v.pair_counts[i];
        }
        sill += v.sill;
    }
    Ok(Semivariogram {
        radii_km: first.radii_km.clone(),
        gamma: weighted
            .iter()
            .zip(&counts)
            .map(|(g, &n)| g / n as f64)
            .collect(),
        pair_counts: counts,
        sill: sill / list.len() as f64,
        bin_width_km: first.bin_width_km,
    })
}
