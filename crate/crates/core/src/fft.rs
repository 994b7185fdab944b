//! Two-dimensional FFT over row-major buffers.

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};
use std::sync::Arc;

pub(crate) struct Fft2 {
    width: usize,
    height: usize,
    rows: Arc<dyn Fft<f64>>,
    cols: Arc<dyn Fft<f64>>,
}

impl Fft2 {
    pub(crate) fn new(width: usize, height: usize, direction: FftDirection) -> Self {
        let mut planner = FftPlanner::new();
        Fft2 {
            width,
            height,
            rows: planner.plan_fft(width, direction),
            cols: planner.plan_fft(height, direction),
        }
    }

    /// Unnormalized in-place transform: rows first, then columns.
    pub(crate) fn process(&self, data: &mut [Complex64]) {
        let (w, h) = (self.width, self.height);
        debug_assert_eq!(data.len(), w * h);
        self.rows.process(data);
        let mut col = vec![Complex64::new(0.0, 0.0); h];
        for c in 0..w {
            for r in 0..h {
                col[r] = data[r * w + c];
            }
            self.cols.process(&mut col);
            for r in 0..h {
                data[r * w + c] = col[r];
            }
        }
    }
}

/// Signed integer frequency of DFT bin `i` for length `n`; the Nyquist bin of
/// an even length maps to `+n/2`.
#[inline]
pub(crate) fn signed_freq(i: usize, n: usize) -> i64 {
    if i <= n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

/// Nearest-integer isotropic wavenumber of mode `(kx, ky)`.
#[inline]
pub(crate) fn annulus(kx: i64, ky: i64) -> usize {
    (((kx * kx + ky * ky) as f64).sqrt()).round() as usize
}
