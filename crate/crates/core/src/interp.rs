//! Nearest, bilinear and bicubic (Keys) upsampling by an integer factor.
//!
//! Sample alignment matches [`coarsen_subsample`](crate::ingest::coarsen_subsample):
//! LR sample `(i, j)` sits at HR pixel `(factor·i, factor·j)`, so HR pixel
//! `(r, c)` evaluates the interpolant at LR coordinates `(r/factor, c/factor)`.
//! Out-of-range taps are clamped to the edge.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::Field2D;

pub const DEFAULT_BICUBIC_A: f64 = -0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    Nearest,
    Bilinear,
    Bicubic,
}

impl fmt::Display for KernelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            KernelKind::Nearest => "nearest",
            KernelKind::Bilinear => "bilinear",
            KernelKind::Bicubic => "bicubic",
        })
    }
}

impl FromStr for KernelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "nearest" => Ok(KernelKind::Nearest),
            "bilinear" => Ok(KernelKind::Bilinear),
            "bicubic" => Ok(KernelKind::Bicubic),
            _ => Err(Error::invalid(format!("unknown kernel {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterpKernel {
    pub kind: KernelKind,
    pub bicubic_a: f64,
}

impl InterpKernel {
    pub fn nearest() -> Self {
        InterpKernel {
            kind: KernelKind::Nearest,
            bicubic_a: DEFAULT_BICUBIC_A,
        }
    }

    pub fn bilinear() -> Self {
        InterpKernel {
            kind: KernelKind::Bilinear,
            bicubic_a: DEFAULT_BICUBIC_A,
        }
    }

    pub fn bicubic(a: f64) -> Self {
        InterpKernel {
            kind: KernelKind::Bicubic,
            bicubic_a: a,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(-1.0..0.0).contains(&self.bicubic_a) {
            return Err(Error::invalid(format!(
                "bicubic a = {} outside [-1, 0)",
                self.bicubic_a
            )));
        }
        Ok(())
    }
}

impl From<KernelKind> for InterpKernel {
    fn from(kind: KernelKind) -> Self {
        InterpKernel {
            kind,
            bicubic_a: DEFAULT_BICUBIC_A,
        }
    }
}

/// Keys cubic convolution kernel.
pub fn keys_weight(t: f64, a: f64) -> f64 {
    let t = t.abs();
    if t <= 1.0 {
        ((a + 2.0) * t - (a + 3.0)) * t * t + 1.0
    } else if t < 2.0 {
        ((a * t - 5.0 * a) * t + 8.0 * a) * t - 4.0 * a
    } else {
        0.0
    }
}

const MAX_TAPS: usize = 4;

/// Source indices and weights for one output coordinate.
#[derive(Debug, Clone, Copy)]
struct Taps {
    index: [usize; MAX_TAPS],
    weight: [f64; MAX_TAPS],
    len: usize,
}

impl Taps {
    fn for_output(pos: usize, factor: usize, n: usize, kernel: &InterpKernel) -> Taps {
        let last = n - 1;
        let base = pos / factor;
        let rem = pos % factor;
        let t = rem as f64 / factor as f64;
        let mut taps = Taps {
            index: [0; MAX_TAPS],
            weight: [0.0; MAX_TAPS],
            len: 0,
        };
        match kernel.kind {
            KernelKind::Nearest => {
                // round half away from zero of pos/factor
                let i = (2 * pos + factor) / (2 * factor);
                taps.index[0] = i.min(last);
                taps.weight[0] = 1.0;
                taps.len = 1;
            }
            KernelKind::Bilinear => {
                taps.index[0] = base.min(last);
                taps.index[1] = (base + 1).min(last);
                taps.weight[0] = 1.0 - t;
                taps.weight[1] = t;
                taps.len = 2;
            }
            KernelKind::Bicubic => {
                let a = kernel.bicubic_a;
                for k in 0..4 {
                    let src = base as isize + k as isize - 1;
                    taps.index[k] = src.clamp(0, last as isize) as usize;
                    taps.weight[k] = keys_weight(t - (k as f64 - 1.0), a);
                }
                taps.len = 4;
            }
        }
        taps
    }

    #[inline]
    fn apply(&self, sample: impl Fn(usize) -> f64) -> f64 {
        let mut acc = 0.0;
        for k in 0..self.len {
            acc += self.weight[k] * sample(self.index[k]);
        }
        acc
    }
}

fn axis_taps(n: usize, factor: usize, kernel: &InterpKernel) -> Vec<Taps> {
    (0..n * factor)
        .map(|p| Taps::for_output(p, factor, n, kernel))
        .collect()
}

fn check(factor: usize, kernel: &InterpKernel) -> Result<()> {
    if factor < 2 {
        return Err(Error::invalid(format!("factor {factor} < 2")));
    }
    kernel.validate()
}

/// Upsamples `lr` to `factor × lr` dims. Bicubic overshoot is kept; the
/// declared range is widened to cover it.
pub fn upsample(lr: &Field2D, factor: usize, kernel: InterpKernel) -> Result<Field2D> {
    upsample_with(lr, factor, kernel, false)
}

/// Like [`upsample`]; with `clamp_output` every value is clamped to the LR
/// declared range.
pub fn upsample_with(
    lr: &Field2D,
    factor: usize,
    kernel: InterpKernel,
    clamp_output: bool,
) -> Result<Field2D> {
    check(factor, &kernel)?;
    let (w, h) = lr.dims();
    let (ow, oh) = (w * factor, h * factor);
    let xt = axis_taps(w, factor, &kernel);
    let yt = axis_taps(h, factor, &kernel);
    let range = lr.declared_range();

    let mut out = vec![0.0; ow * oh];
    out.par_chunks_mut(ow).enumerate().for_each(|(r, row)| {
        let ty = &yt[r];
        for (c, px) in row.iter_mut().enumerate() {
            let tx = &xt[c];
            let v = ty.apply(|i| tx.apply(|j| lr.get(i, j)));
            *px = if clamp_output {
                v.clamp(range.min, range.max)
            } else {
                v
            };
        }
    });

    Field2D::new_covering(
        ow,
        oh,
        lr.variable(),
        lr.pixel_spacing_km() / factor as f64,
        out,
        range,
    )
}

/// One-dimensional upsampling of a sample sequence with the same alignment
/// and boundary rule as [`upsample`].
pub fn upsample_1d(samples: &[f64], factor: usize, kernel: InterpKernel) -> Result<Vec<f64>> {
    check(factor, &kernel)?;
    if samples.is_empty() {
        return Err(Error::Empty("samples"));
    }
    Ok(axis_taps(samples.len(), factor, &kernel)
        .iter()
        .map(|t| t.apply(|i| samples[i]))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::VariableKind;
    use crate::ingest::coarsen_subsample;
    use proptest::prelude::*;

    const KERNELS: [KernelKind; 3] = [
        KernelKind::Nearest,
        KernelKind::Bilinear,
        KernelKind::Bicubic,
    ];

    fn field(w: usize, h: usize, f: impl FnMut(usize, usize) -> f64) -> Field2D {
        Field2D::from_fn(w, h, VariableKind::Ua, 10.0, f).unwrap()
    }

    #[test]
    fn keys_kernel_values() {
        let a = -0.5;
        assert_eq!(keys_weight(0.0, a), 1.0);
        assert_eq!(keys_weight(1.0, a), 0.0);
        assert_eq!(keys_weight(2.0, a), 0.0);
        assert_eq!(keys_weight(-1.5, a), keys_weight(1.5, a));
        // Catmull-Rom at t = 0.5: 0.5625, at 1.5: -0.0625
        assert!((keys_weight(0.5, a) - 0.5625).abs() < 1e-15);
        assert!((keys_weight(1.5, a) + 0.0625).abs() < 1e-15);
    }

    #[test]
    fn constant_field_stays_constant() {
        let lr = Field2D::constant(6, 4, VariableKind::Dni, 20.0, 3.7).unwrap();
        for k in KERNELS {
            let hr = upsample(&lr, 5, k.into()).unwrap();
            assert_eq!(hr.dims(), (30, 20));
            assert_eq!(hr.pixel_spacing_km(), 4.0);
            for &v in hr.values() {
                assert!((v - 3.7).abs() <= 1e-12, "{k}: {v}");
            }
        }
    }

    #[test]
    fn bicubic_reproduces_ramp() {
        let lr = field(20, 20, |_, j| j as f64);
        let hr = upsample(&lr, 5, InterpKernel::bicubic(-0.5)).unwrap();
        // interior columns: at least two LR samples from each border
        for r in 0..100 {
            for c in 10..=85 {
                let expected = c as f64 / 5.0;
                // direct evaluation of the kernel sum
                let (base, t) = (c / 5, (c % 5) as f64 / 5.0);
                let direct: f64 = (0..4)
                    .map(|k| keys_weight(t - (k as f64 - 1.0), -0.5) * (base + k - 1) as f64)
                    .sum();
                assert!((direct - expected).abs() < 1e-9);
                assert!(
                    (hr.get(r, c) - expected).abs() < 1e-9,
                    "({r},{c}) {}",
                    hr.get(r, c)
                );
            }
        }
    }

    #[test]
    fn nearest_delta_makes_a_block() {
        let lr = field(6, 6, |i, j| if (i, j) == (2, 3) { 1.0 } else { 0.0 });
        let hr = upsample(&lr, 5, InterpKernel::nearest()).unwrap();
        for r in 0..30 {
            for c in 0..30 {
                let inside = (8..=12).contains(&r) && (13..=17).contains(&c);
                assert_eq!(hr.get(r, c), if inside { 1.0 } else { 0.0 }, "({r},{c})");
            }
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        let lr = Field2D::constant(2, 2, VariableKind::Ua, 10.0, 0.0).unwrap();
        assert!(upsample(&lr, 1, InterpKernel::bilinear()).is_err());
        assert!(upsample(&lr, 2, InterpKernel::bicubic(0.0)).is_err());
        assert!(upsample(&lr, 2, InterpKernel::bicubic(-1.5)).is_err());
        assert!(upsample(&lr, 2, InterpKernel::bicubic(-1.0)).is_ok());
        assert!("lanczos".parse::<KernelKind>().is_err());
    }

    #[test]
    fn clamp_limits_overshoot() {
        let lr = field(8, 1, |_, j| if j >= 4 { 1.0 } else { 0.0 });
        let raw = upsample(&lr, 5, InterpKernel::bicubic(-0.5)).unwrap();
        let r = raw.data_range();
        assert!(r.min < 0.0 && r.max > 1.0, "expected overshoot, got {r:?}");
        assert!(raw.declared_range().contains(r.min) && raw.declared_range().contains(r.max));
        let clamped = upsample_with(&lr, 5, InterpKernel::bicubic(-0.5), true).unwrap();
        let r = clamped.data_range();
        assert!(r.min >= 0.0 && r.max <= 1.0);
    }

    #[test]
    fn one_pixel_field() {
        let lr = Field2D::constant(1, 1, VariableKind::Ua, 10.0, 2.0).unwrap();
        for k in KERNELS {
            let hr = upsample(&lr, 3, k.into()).unwrap();
            assert!(hr.values().iter().all(|&v| (v - 2.0).abs() < 1e-12));
        }
    }

    fn lr_strategy() -> impl Strategy<Value = (usize, usize, Vec<f64>)> {
        (1usize..9, 1usize..9).prop_flat_map(|(w, h)| {
            (
                Just(w),
                Just(h),
                prop::collection::vec(-50.0f64..50.0, w * h),
            )
        })
    }

    proptest! {
        #[test]
        fn coarsen_inverts_upsample((w, h, v) in lr_strategy(), factor in 2usize..7) {
            let lr = Field2D::from_values(w, h, VariableKind::Ua, 10.0, v).unwrap();
            for k in KERNELS {
                let back = coarsen_subsample(&upsample(&lr, factor, k.into()).unwrap(), factor).unwrap();
                prop_assert_eq!(back.values(), lr.values());
            }
        }

        #[test]
        fn affine_reproduction(a in -3.0f64..3.0, b in -3.0f64..3.0, c in -10.0f64..10.0) {
            let lr = field(10, 9, |i, j| a * j as f64 + b * i as f64 + c);
            let bil = upsample(&lr, 4, InterpKernel::bilinear()).unwrap();
            let bic = upsample(&lr, 4, InterpKernel::bicubic(-0.5)).unwrap();
            for r in 0..bil.height() {
                for col in 0..bil.width() {
                    let exact = a * col as f64 / 4.0 + b * r as f64 / 4.0 + c;
                    // bilinear: anywhere the right/bottom neighbor exists
                    if r <= 32 && col <= 36 {
                        prop_assert!((bil.get(r, col) - exact).abs() < 1e-9);
                    }
                    if (8..=28).contains(&r) && (8..=28).contains(&col) {
                        prop_assert!((bic.get(r, col) - exact).abs() < 1e-9);
                    }
                }
            }
        }

        #[test]
        fn range_bounds((w, h, v) in lr_strategy()) {
            let lr = Field2D::from_values(w, h, VariableKind::Ua, 10.0, v).unwrap();
            let lr_r = lr.data_range();
            for k in [KernelKind::Nearest, KernelKind::Bilinear] {
                let r = upsample(&lr, 5, k.into()).unwrap().data_range();
                prop_assert!(r.min >= lr_r.min - 1e-12 && r.max <= lr_r.max + 1e-12);
            }
            let r = upsample(&lr, 5, InterpKernel::bicubic(-0.5)).unwrap().data_range();
            let slack = 0.25 * lr_r.span();
            prop_assert!(r.min >= lr_r.min - slack - 1e-12 && r.max <= lr_r.max + slack + 1e-12);
        }

        #[test]
        fn bicubic_is_separable((w, h, v) in lr_strategy(), a in -1.0f64..-0.01) {
            let k = InterpKernel::bicubic(a);
            let lr = Field2D::from_values(w, h, VariableKind::Ua, 10.0, v).unwrap();
            let hr = upsample(&lr, 3, k).unwrap();
            // rows first
            let rows: Vec<Vec<f64>> = (0..h).map(|i| upsample_1d(lr.row(i), 3, k).unwrap()).collect();
            for c in 0..w * 3 {
                let col: Vec<f64> = rows.iter().map(|r| r[c]).collect();
                let up = upsample_1d(&col, 3, k).unwrap();
                for (r, val) in up.iter().enumerate() {
                    prop_assert!((hr.get(r, c) - val).abs() <= 1e-12 * (1.0 + val.abs()));
                }
            }
        }
    }
}
