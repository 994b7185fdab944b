//! Isotropic kinetic energy spectra and inertial-range slope fits.
//!
//! Coefficients are normalized by the number of pixels, `Û = FFT(u)/N`, so
//! that `Σ|Û|² = mean(u²)`. Mode energy is `½(|Û|² + |V̂|²)` and modes are
//! binned into annuli `k = round(|(kx, ky)|)` over signed integer
//! frequencies. Annuli `1..=min(W, H)/2` form the series; the DC mode and
//! the corner modes past the last annulus are kept separately so the total
//! still satisfies Parseval.

use rustfft::num_complex::Complex64;
use rustfft::FftDirection;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft::{annulus, signed_freq, Fft2};
use crate::field::Field2D;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSeries {
    pub wavenumbers: Vec<usize>,
    pub energy: Vec<f64>,
    pub dc_energy: f64,
    /// Energy of modes outside the last reported annulus.
    pub residual_energy: f64,
    pub grid_dims: (usize, usize),
}

impl SpectrumSeries {
    pub fn total_energy(&self) -> f64 {
        self.dc_energy + self.energy.iter().sum::<f64>() + self.residual_energy
    }

    pub fn energy_at(&self, k: usize) -> Option<f64> {
        self.wavenumbers
            .iter()
            .position(|&w| w == k)
            .map(|i| self.energy[i])
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpectrumOptions {
    /// Apply a separable periodic Hann taper before the transform.
    pub hann_window: bool,
}

fn hann(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| 0.5 - 0.5 * (2.0 * std::f64::consts::PI * i as f64 / n as f64).cos())
        .collect()
}

fn spectral_power(f: &Field2D, opts: SpectrumOptions) -> Vec<f64> {
    let (w, h) = f.dims();
    let mut data: Vec<Complex64> = f.values().iter().map(|&v| Complex64::new(v, 0.0)).collect();
    if opts.hann_window {
        let (wx, wy) = (hann(w), hann(h));
        for r in 0..h {
            for c in 0..w {
                data[r * w + c] *= wx[c] * wy[r];
            }
        }
    }
    Fft2::new(w, h, FftDirection::Forward).process(&mut data);
    let n2 = ((w * h) as f64).powi(2);
    data.iter().map(|z| z.norm_sqr() / n2).collect()
}

fn bin_modes(power: &[f64], w: usize, h: usize) -> SpectrumSeries {
    let kmax = w.min(h) / 2;
    let mut energy = vec![0.0; kmax];
    let mut dc = 0.0;
    let mut residual = 0.0;
    for r in 0..h {
        let ky = signed_freq(r, h);
        for c in 0..w {
            let e = 0.5 * power[r * w + c];
            match annulus(signed_freq(c, w), ky) {
                0 => dc += e,
                k if k <= kmax => energy[k - 1] += e,
                _ => residual += e,
            }
        }
    }
    SpectrumSeries {
        wavenumbers: (1..=kmax).collect(),
        energy,
        dc_energy: dc,
        residual_energy: residual,
        grid_dims: (w, h),
    }
}

/// Joint kinetic energy spectrum of a `(ua, va)` wind field.
pub fn energy_spectrum(
    ua: &Field2D,
    va: &Field2D,
    opts: SpectrumOptions,
) -> Result<SpectrumSeries> {
    ua.ensure_same_dims(va)?;
    let pu = spectral_power(ua, opts);
    let pv = spectral_power(va, opts);
    let combined: Vec<f64> = pu.iter().zip(&pv).map(|(a, b)| a + b).collect();
    Ok(bin_modes(&combined, ua.width(), ua.height()))
}

/// Spectrum of a single scalar field, `e = ½|F̂|²`.
pub fn energy_spectrum_scalar(f: &Field2D, opts: SpectrumOptions) -> SpectrumSeries {
    bin_modes(&spectral_power(f, opts), f.width(), f.height())
}

/// Pointwise mean, accumulated in slice order.
pub fn average_series(series: &[SpectrumSeries]) -> Result<SpectrumSeries> {
    let first = series.first().ok_or(Error::Empty("spectrum series"))?;
    for s in &series[1..] {
        if s.wavenumbers != first.wavenumbers {
            return Err(Error::MismatchedGrids(format!(
                "{} vs {} wavenumbers",
                first.wavenumbers.len(),
                s.wavenumbers.len()
            )));
        }
    }
    let n = series.len() as f64;
    let mut energy = vec![0.0; first.energy.len()];
    let (mut dc, mut residual) = (0.0, 0.0);
    for s in series {
        for (acc, e) in energy.iter_mut().zip(&s.energy) {
            *acc += e;
        }
        dc += s.dc_energy;
        residual += s.residual_energy;
    }
    Ok(SpectrumSeries {
        wavenumbers: first.wavenumbers.clone(),
        energy: energy.into_iter().map(|e| e / n).collect(),
        dc_energy: dc / n,
        residual_energy: residual / n,
        grid_dims: first.grid_dims,
    })
}

/// Least-squares slope of `log10 E` against `log10 k` over `[k_min, k_max]`.
pub fn spectral_slope(s: &SpectrumSeries, k_min: usize, k_max: usize) -> Result<f64> {
    if k_min >= k_max {
        return Err(Error::invalid(format!(
            "k_min {k_min} must be below k_max {k_max}"
        )));
    }
    let mut pts = Vec::new();
    for (&k, &e) in s.wavenumbers.iter().zip(&s.energy) {
        if k < k_min || k > k_max {
            continue;
        }
        if e <= 0.0 {
            return Err(Error::ZeroEnergy(k));
        }
        pts.push(((k as f64).log10(), e.log10()));
    }
    if pts.len() < 2 {
        return Err(Error::invalid(format!(
            "need at least 2 wavenumbers in [{k_min}, {k_max}], got {}",
            pts.len()
        )));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (x, y) in &pts {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    Ok(sxy / sxx)
}
