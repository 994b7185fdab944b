//! Deterministic fixtures for the criterion benchmarks in `benches/`.

use srbench_core::{Field2D, VariableKind};

/// Smooth multi-scale field with a small hashed roughness term, so that
/// benchmarks never depend on an RNG.
pub fn fixture_field(width: usize, height: usize, variable: VariableKind) -> Field2D {
    Field2D::from_fn(width, height, variable, 2.0, |r, c| {
        let (x, y) = (c as f64, r as f64);
        let h = (r.wrapping_mul(73_856_093) ^ c.wrapping_mul(19_349_663)) % 1000;
        10.0 + 3.0 * (0.07 * x).sin() * (0.05 * y).cos()
            + (0.31 * x + 0.17 * y).sin()
            + h as f64 * 1e-3
    })
    .expect("fixture values are finite")
}
