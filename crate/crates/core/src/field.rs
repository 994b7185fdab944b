//! Gridded scalar fields, wind vector decomposition and summary statistics.
//!
//! A [`Field2D`] is a row-major raster (top row first) of finite values tagged
//! with its physical variable, pixel spacing and a declared value range. Every
//! constructor validates the invariants, so downstream code can assume finite
//! values that lie inside the declared range.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Physical variable carried by a field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VariableKind {
    /// Westward wind component, m/s.
    Ua,
    /// Southward wind component, m/s.
    Va,
    /// Direct normal irradiance, W/m².
    Dni,
    /// Diffuse horizontal irradiance, W/m².
    Dhi,
    /// Wind speed, m/s.
    Speed,
    /// Wind bearing (blowing from), degrees clockwise from north in [0, 360).
    Direction,
    Generic,
}

impl VariableKind {
    pub const ALL: [VariableKind; 7] = [
        VariableKind::Ua,
        VariableKind::Va,
        VariableKind::Dni,
        VariableKind::Dhi,
        VariableKind::Speed,
        VariableKind::Direction,
        VariableKind::Generic,
    ];

    /// Identifier used by the WSSR binary header.
    pub fn id(self) -> u8 {
        match self {
            VariableKind::Ua => 0,
            VariableKind::Va => 1,
            VariableKind::Dni => 2,
            VariableKind::Dhi => 3,
            VariableKind::Speed => 4,
            VariableKind::Direction => 5,
            VariableKind::Generic => 6,
        }
    }

    pub fn from_id(id: u8) -> Option<Self> {
        Self::ALL.get(id as usize).copied()
    }

    pub fn units(self) -> &'static str {
        match self {
            VariableKind::Ua | VariableKind::Va | VariableKind::Speed => "m/s",
            VariableKind::Dni | VariableKind::Dhi => "W/m²",
            VariableKind::Direction => "deg",
            VariableKind::Generic => "",
        }
    }

    pub fn is_wind(self) -> bool {
        matches!(
            self,
            VariableKind::Ua | VariableKind::Va | VariableKind::Speed | VariableKind::Direction
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            VariableKind::Ua => "ua",
            VariableKind::Va => "va",
            VariableKind::Dni => "dni",
            VariableKind::Dhi => "dhi",
            VariableKind::Speed => "speed",
            VariableKind::Direction => "direction",
            VariableKind::Generic => "generic",
        }
    }
}

impl fmt::Display for VariableKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for VariableKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::invalid(format!("unknown variable {s:?}")))
    }
}

/// Closed value interval `[min, max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValueRange {
    pub min: f64,
    pub max: f64,
}

impl ValueRange {
    pub fn new(min: f64, max: f64) -> Self {
        ValueRange { min, max }
    }

    pub fn span(&self) -> f64 {
        self.max - self.min
    }

    pub fn union(&self, other: &ValueRange) -> ValueRange {
        ValueRange::new(self.min.min(other.min), self.max.max(other.max))
    }

    pub fn contains(&self, v: f64) -> bool {
        self.min <= v && v <= self.max
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Field2D {
    width: usize,
    height: usize,
    variable: VariableKind,
    pixel_spacing_km: f64,
    values: Vec<f64>,
    declared_range: ValueRange,
}

impl Field2D {
    pub fn new(
        width: usize,
        height: usize,
        variable: VariableKind,
        pixel_spacing_km: f64,
        values: Vec<f64>,
        declared_range: ValueRange,
    ) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidField(format!("empty grid {width}x{height}")));
        }
        if values.len() != width * height {
            return Err(Error::InvalidField(format!(
                "{} values for a {width}x{height} grid",
                values.len()
            )));
        }
        if !(pixel_spacing_km.is_finite() && pixel_spacing_km > 0.0) {
            return Err(Error::InvalidField(format!(
                "pixel spacing {pixel_spacing_km} km"
            )));
        }
        if !(declared_range.min.is_finite()
            && declared_range.max.is_finite()
            && declared_range.min <= declared_range.max)
        {
            return Err(Error::InvalidField(format!(
                "declared range [{}, {}]",
                declared_range.min, declared_range.max
            )));
        }
        for (i, &v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::InvalidField(format!(
                    "non-finite value at index {i}"
                )));
            }
            if !declared_range.contains(v) {
                return Err(Error::InvalidField(format!(
                    "value {v} at index {i} outside declared range [{}, {}]",
                    declared_range.min, declared_range.max
                )));
            }
        }
        Ok(Field2D {
            width,
            height,
            variable,
            pixel_spacing_km,
            values,
            declared_range,
        })
    }

    /// Builds a field whose declared range is the exact data extent.
    pub fn from_values(
        width: usize,
        height: usize,
        variable: VariableKind,
        pixel_spacing_km: f64,
        values: Vec<f64>,
    ) -> Result<Self> {
        let range = data_extent(&values).unwrap_or(ValueRange::new(0.0, 0.0));
        Self::new(width, height, variable, pixel_spacing_km, values, range)
    }

    /// Builds a field from a per-pixel function of `(row, col)`.
    pub fn from_fn(
        width: usize,
        height: usize,
        variable: VariableKind,
        pixel_spacing_km: f64,
        mut f: impl FnMut(usize, usize) -> f64,
    ) -> Result<Self> {
        let mut values = Vec::with_capacity(width * height);
        for r in 0..height {
            for c in 0..width {
                values.push(f(r, c));
            }
        }
        Self::from_values(width, height, variable, pixel_spacing_km, values)
    }

    pub fn constant(
        width: usize,
        height: usize,
        variable: VariableKind,
        pixel_spacing_km: f64,
        value: f64,
    ) -> Result<Self> {
        Self::from_values(
            width,
            height,
            variable,
            pixel_spacing_km,
            vec![value; width * height],
        )
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn variable(&self) -> VariableKind {
        self.variable
    }

    pub fn pixel_spacing_km(&self) -> f64 {
        self.pixel_spacing_km
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn declared_range(&self) -> ValueRange {
        self.declared_range
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.width + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.values[row * self.width..(row + 1) * self.width]
    }

    /// Exact min/max of the stored values.
    pub fn data_range(&self) -> ValueRange {
        data_extent(&self.values).expect("field is never empty")
    }

    /// Returns a copy with the declared range replaced; the new range must
    /// still cover every value.
    pub fn with_declared_range(&self, range: ValueRange) -> Result<Self> {
        Self::new(
            self.width,
            self.height,
            self.variable,
            self.pixel_spacing_km,
            self.values.clone(),
            range,
        )
    }

    pub fn with_variable(mut self, variable: VariableKind) -> Self {
        self.variable = variable;
        self
    }

    /// Like [`Field2D::new`], but `base_range` is widened to cover the data.
    pub fn new_covering(
        width: usize,
        height: usize,
        variable: VariableKind,
        pixel_spacing_km: f64,
        values: Vec<f64>,
        base_range: ValueRange,
    ) -> Result<Self> {
        let range = match data_extent(&values) {
            Some(r) if r.min.is_finite() && r.max.is_finite() => base_range.union(&r),
            _ => base_range,
        };
        Self::new(width, height, variable, pixel_spacing_km, values, range)
    }

    /// Same geometry and metadata, new values. The declared range is widened
    /// to cover the new data.
    pub fn map_values(&self, values: Vec<f64>) -> Result<Self> {
        Self::new_covering(
            self.width,
            self.height,
            self.variable,
            self.pixel_spacing_km,
            values,
            self.declared_range,
        )
    }

    pub fn transpose(&self) -> Self {
        let mut values = Vec::with_capacity(self.values.len());
        for c in 0..self.width {
            for r in 0..self.height {
                values.push(self.get(r, c));
            }
        }
        Field2D {
            width: self.height,
            height: self.width,
            values,
            ..self.clone()
        }
    }

    pub(crate) fn ensure_same_dims(&self, other: &Field2D) -> Result<()> {
        if self.dims() != other.dims() {
            return Err(Error::DimensionMismatch {
                left_w: self.width,
                left_h: self.height,
                right_w: other.width,
                right_h: other.height,
            });
        }
        Ok(())
    }
}

fn data_extent(values: &[f64]) -> Option<ValueRange> {
    let first = *values.first()?;
    let mut range = ValueRange::new(first, first);
    for &v in &values[1..] {
        range.min = range.min.min(v);
        range.max = range.max.max(v);
    }
    Some(range)
}

/// A registered low/high resolution pair.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldPair {
    pub lr: Field2D,
    pub hr: Field2D,
    pub factor: usize,
}

impl FieldPair {
    pub fn new(lr: Field2D, hr: Field2D, factor: usize) -> Result<Self> {
        if factor < 2 {
            return Err(Error::invalid(format!("factor {factor} < 2")));
        }
        if lr.variable() != hr.variable() {
            return Err(Error::invalid(format!(
                "variable mismatch: lr {} vs hr {}",
                lr.variable(),
                hr.variable()
            )));
        }
        if lr.width() != hr.width().div_ceil(factor) || lr.height() != hr.height().div_ceil(factor)
        {
            return Err(Error::invalid(format!(
                "lr {}x{} is not the {factor}x subsample of hr {}x{}",
                lr.width(),
                lr.height(),
                hr.width(),
                hr.height()
            )));
        }
        let expected = hr.pixel_spacing_km() * factor as f64;
        if (lr.pixel_spacing_km() - expected).abs() > 1e-9 * expected {
            return Err(Error::invalid(format!(
                "lr spacing {} km, expected {expected} km",
                lr.pixel_spacing_km()
            )));
        }
        Ok(FieldPair { lr, hr, factor })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldStats {
    pub mean: f64,
    /// Population variance.
    pub variance: f64,
    pub min: f64,
    pub max: f64,
}

pub fn field_stats(f: &Field2D) -> FieldStats {
    let range = f.data_range();
    let n = f.len() as f64;
    let mean = (f.values().iter().sum::<f64>() / n).clamp(range.min, range.max);
    let variance = f
        .values()
        .iter()
        .map(|v| {
            let d = v - mean;
            d * d
        })
        .sum::<f64>()
        / n;
    FieldStats {
        mean,
        variance,
        min: range.min,
        max: range.max,
    }
}

/// Splits speed/direction into westward (`ua = s·sin θ`) and southward
/// (`va = s·cos θ`) components, θ being the meteorological "from" bearing.
pub fn decompose_wind(speed: &Field2D, direction: &Field2D) -> Result<(Field2D, Field2D)> {
    speed.ensure_same_dims(direction)?;
    if speed.pixel_spacing_km() != direction.pixel_spacing_km() {
        return Err(Error::invalid(format!(
            "pixel spacing mismatch: {} vs {} km",
            speed.pixel_spacing_km(),
            direction.pixel_spacing_km()
        )));
    }
    if let Some(s) = speed.values().iter().find(|&&s| s < 0.0) {
        return Err(Error::invalid(format!("negative speed {s}")));
    }
    if let Some(d) = direction
        .values()
        .iter()
        .find(|&&d| !(0.0..360.0).contains(&d))
    {
        return Err(Error::invalid(format!(
            "direction {d} out of range [0, 360)"
        )));
    }

    let n = speed.len();
    let mut ua = Vec::with_capacity(n);
    let mut va = Vec::with_capacity(n);
    for (&s, &d) in speed.values().iter().zip(direction.values()) {
        let (sin, cos) = d.to_radians().sin_cos();
        ua.push(s * sin);
        va.push(s * cos);
    }
    let smax = speed.data_range().max;
    let range = ValueRange::new(-smax, smax);
    let (w, h, dx) = (speed.width(), speed.height(), speed.pixel_spacing_km());
    Ok((
        Field2D::new(w, h, VariableKind::Ua, dx, ua, range)?,
        Field2D::new(w, h, VariableKind::Va, dx, va, range)?,
    ))
}

/// Inverse of [`decompose_wind`]. Calm pixels get direction 0.
pub fn recompose_wind(ua: &Field2D, va: &Field2D) -> Result<(Field2D, Field2D)> {
    ua.ensure_same_dims(va)?;
    let n = ua.len();
    let mut speed = Vec::with_capacity(n);
    let mut direction = Vec::with_capacity(n);
    for (&u, &v) in ua.values().iter().zip(va.values()) {
        let s = u.hypot(v);
        speed.push(s);
        direction.push(if s == 0.0 { 0.0 } else { bearing_deg(u, v) });
    }
    let smax = speed.iter().copied().fold(0.0_f64, f64::max);
    let (w, h, dx) = (ua.width(), ua.height(), ua.pixel_spacing_km());
    Ok((
        Field2D::new(
            w,
            h,
            VariableKind::Speed,
            dx,
            speed,
            ValueRange::new(0.0, smax),
        )?,
        Field2D::new(
            w,
            h,
            VariableKind::Direction,
            dx,
            direction,
            ValueRange::new(0.0, 360.0),
        )?,
    ))
}

fn bearing_deg(ua: f64, va: f64) -> f64 {
    let mut d = ua.atan2(va).to_degrees();
    if d < 0.0 {
        d += 360.0;
    }
    if d >= 360.0 {
        d -= 360.0;
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn field(w: usize, h: usize, kind: VariableKind, values: Vec<f64>) -> Field2D {
        Field2D::from_values(w, h, kind, 2.0, values).unwrap()
    }

    #[test]
    fn rejects_bad_fields() {
        assert!(Field2D::from_values(0, 1, VariableKind::Generic, 1.0, vec![]).is_err());
        assert!(Field2D::from_values(2, 1, VariableKind::Generic, 1.0, vec![1.0]).is_err());
        assert!(Field2D::from_values(1, 1, VariableKind::Generic, 1.0, vec![f64::NAN]).is_err());
        assert!(Field2D::from_values(1, 1, VariableKind::Generic, 0.0, vec![1.0]).is_err());
        assert!(Field2D::new(
            1,
            1,
            VariableKind::Generic,
            1.0,
            vec![5.0],
            ValueRange::new(0.0, 4.0)
        )
        .is_err());
    }

    #[test]
    fn variable_ids_round_trip() {
        for k in VariableKind::ALL {
            assert_eq!(VariableKind::from_id(k.id()), Some(k));
            assert_eq!(k.name().parse::<VariableKind>().unwrap(), k);
        }
        assert_eq!(VariableKind::from_id(7), None);
    }

    #[test]
    fn zero_speed_gives_zero_components() {
        let s = field(3, 2, VariableKind::Speed, vec![0.0; 6]);
        let d = field(
            3,
            2,
            VariableKind::Direction,
            vec![0.0, 45.0, 90.0, 180.0, 270.0, 359.0],
        );
        let (ua, va) = decompose_wind(&s, &d).unwrap();
        assert!(ua.values().iter().chain(va.values()).all(|&x| x == 0.0));
    }

    #[test]
    fn axis_aligned_winds() {
        let s = field(1, 1, VariableKind::Speed, vec![10.0]);
        let east = field(1, 1, VariableKind::Direction, vec![90.0]);
        let (ua, va) = decompose_wind(&s, &east).unwrap();
        assert!((ua.get(0, 0) - 10.0).abs() < 1e-12);
        assert!(va.get(0, 0).abs() < 1e-12);
        assert_eq!(ua.declared_range(), ValueRange::new(-10.0, 10.0));

        let north = field(1, 1, VariableKind::Direction, vec![0.0]);
        let (ua, va) = decompose_wind(&s, &north).unwrap();
        assert_eq!(ua.get(0, 0), 0.0);
        assert_eq!(va.get(0, 0), 10.0);
    }

    #[test]
    fn decompose_errors() {
        let s = field(2, 1, VariableKind::Speed, vec![1.0, 1.0]);
        let d = field(1, 1, VariableKind::Direction, vec![0.0]);
        assert!(matches!(
            decompose_wind(&s, &d),
            Err(Error::DimensionMismatch { .. })
        ));

        let neg = field(1, 1, VariableKind::Speed, vec![-1.0]);
        assert!(decompose_wind(&neg, &d).is_err());

        let s1 = field(1, 1, VariableKind::Speed, vec![1.0]);
        let bad = field(1, 1, VariableKind::Direction, vec![360.0]);
        assert!(decompose_wind(&s1, &bad).is_err());
    }

    #[test]
    fn recompose_examples() {
        let ua = field(3, 1, VariableKind::Ua, vec![10.0, 0.0, 3.0]);
        let va = field(3, 1, VariableKind::Va, vec![0.0, 0.0, 4.0]);
        let (s, d) = recompose_wind(&ua, &va).unwrap();
        assert_eq!(s.values(), &[10.0, 0.0, 5.0]);
        assert!((d.get(0, 0) - 90.0).abs() < 1e-12);
        assert_eq!(d.get(0, 1), 0.0);
        let expected = 3.0_f64.atan2(4.0).to_degrees();
        assert!((d.get(0, 2) - expected).abs() < 1e-12);
        assert!((d.get(0, 2) - 36.869_897_645_844_02).abs() < 1e-9);
    }

    #[test]
    fn stats_examples() {
        let c = field(3, 3, VariableKind::Generic, vec![0.1; 9]);
        let s = field_stats(&c);
        assert_eq!((s.mean, s.variance, s.min, s.max), (0.1, 0.0, 0.1, 0.1));

        let s = field_stats(&field(
            2,
            2,
            VariableKind::Generic,
            vec![0.0, 0.0, 4.0, 4.0],
        ));
        assert_eq!((s.mean, s.variance), (2.0, 4.0));

        let s = field_stats(&field(1, 1, VariableKind::Generic, vec![1.0]));
        assert_eq!((s.mean, s.variance), (1.0, 0.0));
    }

    #[test]
    fn pair_validation() {
        let hr = Field2D::constant(10, 10, VariableKind::Dni, 4.0, 1.0).unwrap();
        let lr = Field2D::constant(2, 2, VariableKind::Dni, 20.0, 1.0).unwrap();
        assert!(FieldPair::new(lr.clone(), hr.clone(), 5).is_ok());
        assert!(FieldPair::new(lr.clone(), hr.clone(), 4).is_err());
        assert!(FieldPair::new(lr.with_variable(VariableKind::Dhi), hr, 5).is_err());
    }

    fn angle_diff(a: f64, b: f64) -> f64 {
        let d = (a - b).rem_euclid(360.0);
        d.min(360.0 - d)
    }

    proptest! {
        #[test]
        fn wind_round_trip(
            pts in prop::collection::vec((1e-3f64..60.0, 0.0f64..360.0), 1..40)
        ) {
            let n = pts.len();
            let s = field(n, 1, VariableKind::Speed, pts.iter().map(|p| p.0).collect());
            let d = field(n, 1, VariableKind::Direction, pts.iter().map(|p| p.1).collect());
            let (ua, va) = decompose_wind(&s, &d).unwrap();
            for i in 0..n {
                let (u, v, sp) = (ua.values()[i], va.values()[i], s.values()[i]);
                prop_assert!(((u * u + v * v) - sp * sp).abs() <= 1e-9 * sp * sp);
            }
            let (s2, d2) = recompose_wind(&ua, &va).unwrap();
            for i in 0..n {
                prop_assert!((s2.values()[i] - s.values()[i]).abs() <= 1e-9);
                prop_assert!(angle_diff(d2.values()[i], d.values()[i]) <= 1e-9);
                prop_assert!((0.0..360.0).contains(&d2.values()[i]));
            }
        }

        #[test]
        fn variance_matches_naive_two_pass(values in prop::collection::vec(-1e3f64..1e3, 1..200)) {
            let f = field(values.len(), 1, VariableKind::Generic, values.clone());
            let stats = field_stats(&f);
            let n = values.len() as f64;
            let mut mean = 0.0;
            for v in &values { mean += v; }
            mean /= n;
            let mut var = 0.0;
            for v in &values { var += (v - mean) * (v - mean); }
            var /= n;
            prop_assert!((stats.variance - var).abs() <= 1e-10 * var.max(1e-300));
            prop_assert!(stats.variance >= 0.0);
            prop_assert!(stats.min <= stats.mean && stats.mean <= stats.max);
        }
    }
}
