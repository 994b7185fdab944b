//! Benchmark harness for spatial super-resolution of gridded wind and solar
//! fields.

pub mod error;
mod fft;
pub mod field;
pub mod ingest;
pub mod interp;
pub mod io;
pub mod metrics;
pub mod plot;
pub mod runner;
mod serde_float;
pub mod spectrum;
pub mod synth;
pub mod variogram;

pub use error::{Error, Result};
pub use field::{
    decompose_wind, field_stats, recompose_wind, Field2D, FieldPair, FieldStats, ValueRange,
    VariableKind,
};
pub use runner::{emit_report, run_benchmark, BenchmarkConfig, BenchmarkReport};
