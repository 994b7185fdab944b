//! Distortion metrics between a super-resolved field and its ground truth.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::Field2D;

pub fn mae(sr: &Field2D, hr: &Field2D) -> Result<f64> {
    sr.ensure_same_dims(hr)?;
    let sum: f64 = sr
        .values()
        .iter()
        .zip(hr.values())
        .map(|(a, b)| (a - b).abs())
        .sum();
    Ok(sum / sr.len() as f64)
}

/// Plain mean squared error.
pub fn mse(sr: &Field2D, hr: &Field2D) -> Result<f64> {
    sr.ensure_same_dims(hr)?;
    Ok(sum_sq_diff(sr.values(), hr.values()) / sr.len() as f64)
}

fn sum_sq_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = x - y;
            d * d
        })
        .sum()
}

/// `Σ(sr − hr)² / Σ(hr − mean(hr))²`: squared error relative to the
/// ground-truth variance, so predicting the mean scores 1.
pub fn mse_rel(sr: &Field2D, hr: &Field2D) -> Result<f64> {
    sr.ensure_same_dims(hr)?;
    let n = hr.len() as f64;
    let mean = hr.values().iter().sum::<f64>() / n;
    let denom: f64 = hr
        .values()
        .iter()
        .map(|v| {
            let d = v - mean;
            d * d
        })
        .sum();
    if denom == 0.0 {
        return Err(Error::ZeroVarianceReference);
    }
    Ok(sum_sq_diff(sr.values(), hr.values()) / denom)
}

/// Peak signal-to-noise ratio in dB; `+∞` for identical inputs.
pub fn psnr(sr: &Field2D, hr: &Field2D, data_range: f64) -> Result<f64> {
    if !(data_range.is_finite() && data_range > 0.0) {
        return Err(Error::invalid(format!(
            "data range {data_range} must be positive"
        )));
    }
    let m = mse(sr, hr)?;
    if m == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(20.0 * data_range.log10() - 10.0 * m.log10())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SsimParams {
    pub window: usize,
    pub gaussian_sigma: f64,
    pub k1: f64,
    pub k2: f64,
    pub data_range: f64,
}

impl SsimParams {
    pub fn with_range(data_range: f64) -> Self {
        SsimParams {
            window: 11,
            gaussian_sigma: 1.5,
            k1: 0.01,
            k2: 0.03,
            data_range,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.window < 3 || self.window % 2 == 0 {
            return Err(Error::invalid(format!(
                "ssim window {} must be odd and >= 3",
                self.window
            )));
        }
        if !(self.gaussian_sigma > 0.0 && self.k1 > 0.0 && self.k2 > 0.0) {
            return Err(Error::invalid("ssim sigma, k1 and k2 must be positive"));
        }
        if !(self.data_range.is_finite() && self.data_range > 0.0) {
            return Err(Error::invalid(format!(
                "ssim data range {} must be positive",
                self.data_range
            )));
        }
        Ok(())
    }

    /// Normalized 1-D Gaussian taps; the 2-D window is their outer product.
    pub fn gaussian_taps(&self) -> Vec<f64> {
        let c = (self.window / 2) as f64;
        let two_s2 = 2.0 * self.gaussian_sigma * self.gaussian_sigma;
        let raw: Vec<f64> = (0..self.window)
            .map(|i| {
                let d = i as f64 - c;
                (-d * d / two_s2).exp()
            })
            .collect();
        let total: f64 = raw.iter().sum();
        raw.into_iter().map(|v| v / total).collect()
    }
}

/// Separable "valid" filtering: output is `(h − win + 1) × (w − win + 1)`.
fn filter_valid(values: &[f64], w: usize, h: usize, taps: &[f64]) -> Vec<f64> {
    let win = taps.len();
    let (ow, oh) = (w - win + 1, h - win + 1);
    let mut horiz = vec![0.0; h * ow];
    for r in 0..h {
        let row = &values[r * w..(r + 1) * w];
        for c in 0..ow {
            let mut acc = 0.0;
            for (k, t) in taps.iter().enumerate() {
                acc += t * row[c + k];
            }
            horiz[r * ow + c] = acc;
        }
    }
    let mut out = vec![0.0; oh * ow];
    for r in 0..oh {
        for c in 0..ow {
            let mut acc = 0.0;
            for (k, t) in taps.iter().enumerate() {
                acc += t * horiz[(r + k) * ow + c];
            }
            out[r * ow + c] = acc;
        }
    }
    out
}

/// Mean SSIM over every window position fully inside the field.
pub fn ssim(sr: &Field2D, hr: &Field2D, p: &SsimParams) -> Result<f64> {
    sr.ensure_same_dims(hr)?;
    p.validate()?;
    let (w, h) = sr.dims();
    if w < p.window || h < p.window {
        return Err(Error::invalid(format!(
            "field {w}x{h} smaller than ssim window {}",
            p.window
        )));
    }
    let taps = p.gaussian_taps();
    let (x, y) = (sr.values(), hr.values());
    let xx: Vec<f64> = x.iter().map(|v| v * v).collect();
    let yy: Vec<f64> = y.iter().map(|v| v * v).collect();
    let xy: Vec<f64> = x.iter().zip(y).map(|(a, b)| a * b).collect();

    let mu_x = filter_valid(x, w, h, &taps);
    let mu_y = filter_valid(y, w, h, &taps);
    let e_xx = filter_valid(&xx, w, h, &taps);
    let e_yy = filter_valid(&yy, w, h, &taps);
    let e_xy = filter_valid(&xy, w, h, &taps);

    let c1 = (p.k1 * p.data_range).powi(2);
    let c2 = (p.k2 * p.data_range).powi(2);
    let mut total = 0.0;
    for i in 0..mu_x.len() {
        total += ssim_term(
            mu_x[i],
            mu_y[i],
            e_xx[i] - mu_x[i] * mu_x[i],
            e_yy[i] - mu_y[i] * mu_y[i],
            e_xy[i] - mu_x[i] * mu_y[i],
            c1,
            c2,
        );
    }
    Ok(total / mu_x.len() as f64)
}

#[inline]
pub(crate) fn ssim_term(mx: f64, my: f64, vx: f64, vy: f64, cxy: f64, c1: f64, c2: f64) -> f64 {
    let mxy = mx * my;
    ((2.0 * mxy + c1) * (2.0 * cxy + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2))
}

/// Per-entry metric values; `None` marks a metric that was not requested.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    #[serde(with = "crate::serde_float")]
    pub psnr_db: Option<f64>,
    #[serde(with = "crate::serde_float")]
    pub ssim: Option<f64>,
    #[serde(with = "crate::serde_float")]
    pub mse_rel: Option<f64>,
    #[serde(with = "crate::serde_float")]
    pub mae: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Psnr,
    Ssim,
    MseRel,
    Mae,
}

impl Metric {
    pub const ALL: [Metric; 4] = [Metric::Psnr, Metric::Ssim, Metric::MseRel, Metric::Mae];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Psnr => "psnr",
            Metric::Ssim => "ssim",
            Metric::MseRel => "mse_rel",
            Metric::Mae => "mae",
        }
    }
}

impl MetricsReport {
    pub fn get(&self, m: Metric) -> Option<f64> {
        match m {
            Metric::Psnr => self.psnr_db,
            Metric::Ssim => self.ssim,
            Metric::MseRel => self.mse_rel,
            Metric::Mae => self.mae,
        }
    }

    pub fn set(&mut self, m: Metric, v: Option<f64>) {
        match m {
            Metric::Psnr => self.psnr_db = v,
            Metric::Ssim => self.ssim = v,
            Metric::MseRel => self.mse_rel = v,
            Metric::Mae => self.mae = v,
        }
    }

    /// Arithmetic mean per metric, summed in slice order. A metric is `None`
    /// in the result if it is missing from any report.
    pub fn mean(reports: &[MetricsReport]) -> MetricsReport {
        let mut out = MetricsReport::default();
        if reports.is_empty() {
            return out;
        }
        for m in Metric::ALL {
            let mut sum = 0.0;
            let mut complete = true;
            for r in reports {
                match r.get(m) {
                    Some(v) => sum += v,
                    None => complete = false,
                }
            }
            if complete {
                out.set(m, Some(sum / reports.len() as f64));
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
}

impl Histogram {
    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }
}

/// Uniform bins over `[min, max]`; the last bin is closed on the right. A
/// degenerate range produces a single bin holding everything.
pub fn metric_distribution(values: &[f64], bin_count: usize) -> Result<Histogram> {
    if values.is_empty() {
        return Err(Error::Empty("metric values"));
    }
    if bin_count == 0 {
        return Err(Error::invalid("bin count must be at least 1"));
    }
    if let Some(v) = values.iter().find(|v| !v.is_finite()) {
        return Err(Error::invalid(format!("non-finite metric value {v}")));
    }
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if min == max {
        return Ok(Histogram {
            edges: vec![min, max],
            counts: vec![values.len()],
        });
    }
    let span = max - min;
    let edges = (0..=bin_count)
        .map(|i| {
            if i == bin_count {
                max
            } else {
                min + span * i as f64 / bin_count as f64
            }
        })
        .collect();
    let mut counts = vec![0; bin_count];
    for &v in values {
        let idx = (((v - min) / span) * bin_count as f64).floor() as usize;
        counts[idx.min(bin_count - 1)] += 1;
    }
    Ok(Histogram { edges, counts })
}
