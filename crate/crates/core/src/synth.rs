//! Synthetic Gaussian random fields with a prescribed isotropic spectrum.
//!
//! White noise supplies Hermitian-symmetric random phases; every mode in
//! annulus `k` then gets the same amplitude so that the annulus carries
//! exactly the requested energy `E(k)`.

use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex64;
use rustfft::FftDirection;

use crate::error::{Error, Result};
use crate::fft::{annulus, signed_freq, Fft2};
use crate::field::{Field2D, VariableKind};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLawSpectrum {
    /// `E(k) ∝ k^exponent`.
    pub exponent: f64,
    pub k_min: usize,
    /// Inclusive; `None` means `min(W, H)/2`.
    pub k_max: Option<usize>,
}

impl PowerLawSpectrum {
    pub fn kolmogorov() -> Self {
        PowerLawSpectrum {
            exponent: -5.0 / 3.0,
            k_min: 1,
            k_max: None,
        }
    }

    /// Smooth field with energy only in `1..=k_max`.
    pub fn band_limited(k_max: usize, exponent: f64) -> Self {
        PowerLawSpectrum {
            exponent,
            k_min: 1,
            k_max: Some(k_max),
        }
    }

    pub fn energy(&self, k: usize) -> f64 {
        (k as f64).powf(self.exponent)
    }
}

/// Zero-mean random field on a `w × h` periodic grid whose annular energy
/// (`½|Û|²` summed over annulus `k`) equals `spec.energy(k)` inside the band
/// and zero elsewhere.
pub fn gaussian_random_field<R: Rng + ?Sized>(
    w: usize,
    h: usize,
    spec: &PowerLawSpectrum,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if w < 2 || h < 2 {
        return Err(Error::invalid(format!("grid {w}x{h} too small")));
    }
    let kmax = spec.k_max.unwrap_or(w.min(h) / 2);
    if spec.k_min == 0 || spec.k_min > kmax {
        return Err(Error::invalid(format!(
            "empty band [{}, {kmax}]",
            spec.k_min
        )));
    }

    let mut modes: Vec<Complex64> = (0..w * h)
        .map(|_| Complex64::new(rng.sample(StandardNormal), 0.0))
        .collect();
    Fft2::new(w, h, FftDirection::Forward).process(&mut modes);

    let mut counts = vec![0usize; kmax + 1];
    let ann: Vec<usize> = (0..w * h)
        .map(|i| annulus(signed_freq(i % w, w), signed_freq(i / w, h)))
        .collect();
    for &k in &ann {
        if k <= kmax {
            counts[k] += 1;
        }
    }

    for (z, &k) in modes.iter_mut().zip(&ann) {
        if k < spec.k_min || k > kmax || z.norm() == 0.0 {
            *z = Complex64::new(0.0, 0.0);
            continue;
        }
        // each mode holds ½|Û|² = E(k)/n_k
        let amp = (2.0 * spec.energy(k) / counts[k] as f64).sqrt();
        *z = *z / z.norm() * amp;
    }
    Fft2::new(w, h, FftDirection::Inverse).process(&mut modes);
    Ok(modes.into_iter().map(|z| z.re).collect())
}

/// Rescales zero-mean values to the requested mean and standard deviation.
pub fn standardize(values: &mut [f64], mean: f64, std: f64) {
    let n = values.len() as f64;
    let m = values.iter().sum::<f64>() / n;
    let sd = (values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n).sqrt();
    let scale = if sd > 0.0 { std / sd } else { 0.0 };
    for v in values.iter_mut() {
        *v = mean + (*v - m) * scale;
    }
}

/// Convenience wrapper returning a [`Field2D`].
#[allow(clippy::too_many_arguments)]
pub fn synthetic_field<R: Rng + ?Sized>(
    w: usize,
    h: usize,
    spec: &PowerLawSpectrum,
    mean: f64,
    std: f64,
    variable: VariableKind,
    pixel_spacing_km: f64,
    rng: &mut R,
) -> Result<Field2D> {
    let mut values = gaussian_random_field(w, h, spec, rng)?;
    standardize(&mut values, mean, std);
    Field2D::from_values(w, h, variable, pixel_spacing_km, values)
}
