use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use srbench_core::interp::KernelKind;
use srbench_core::VariableKind;

mod commands;

#[derive(Parser, Debug)]
#[command(
    name = "srbench",
    version,
    about = "Super-resolution benchmark harness for gridded wind and solar fields"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Rasterize a scattered lat,lon,value CSV into WSSR fields.
    Ingest(IngestArgs),
    /// Chip and coarsen HR fields into an LR/HR dataset with a manifest.
    Build(BuildArgs),
    /// Upsample a single LR field with an interpolation baseline.
    Upsample(UpsampleArgs),
    /// Run a benchmark from a TOML or JSON config.
    Bench(BenchArgs),
    /// Render spectrum or semivariogram CSVs as an SVG line chart.
    Plot(PlotArgs),
    /// Generate a synthetic power-law random field.
    Synth(SynthArgs),
}

#[derive(Args, Debug)]
pub struct IngestArgs {
    /// CSV with a header row containing lat and lon columns.
    pub input: PathBuf,
    /// Output directory; fields are written as `<variable>.wssr`.
    #[arg(short, long)]
    pub output: PathBuf,
    #[arg(long, default_value = "generic")]
    pub variable: VariableKind,
    #[arg(long)]
    pub spacing_km: f64,
    /// Value column for scalar variables.
    #[arg(long, default_value = "value")]
    pub column: String,
    /// Treat the input as wind speed/direction and write `ua.wssr` and `va.wssr`.
    #[arg(long, conflicts_with = "column")]
    pub wind: bool,
    #[arg(long, default_value = "speed")]
    pub speed_column: String,
    #[arg(long, default_value = "direction")]
    pub direction_column: String,
}

#[derive(Args, Debug)]
pub struct BuildArgs {
    /// HR fields (WSSR), all of one variable and spacing.
    #[arg(required = true)]
    pub fields: Vec<PathBuf>,
    #[arg(short, long)]
    pub output: PathBuf,
    #[arg(long, default_value = "dataset")]
    pub name: String,
    #[arg(long, default_value_t = 5)]
    pub factor: usize,
    #[arg(long, default_value_t = 100)]
    pub chip_size: usize,
    /// Defaults to the chip size.
    #[arg(long)]
    pub stride: Option<usize>,
    /// Also write colormapped PNGs under `hr_png/` and `lr_png/`.
    #[arg(long)]
    pub png: bool,
}

#[derive(Args, Debug)]
pub struct UpsampleArgs {
    pub input: PathBuf,
    #[arg(short, long)]
    pub output: PathBuf,
    #[arg(long, default_value_t = 5)]
    pub factor: usize,
    #[arg(long, default_value = "bicubic")]
    pub kernel: KernelKind,
    #[arg(long, default_value_t = -0.5, allow_negative_numbers = true)]
    pub bicubic_a: f64,
    #[arg(long)]
    pub clamp_output: bool,
    /// HR field to score the result against; metrics are printed as JSON.
    #[arg(long)]
    pub reference: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    pub config: PathBuf,
    #[arg(long)]
    pub parallelism: Option<usize>,
    #[arg(long)]
    pub factor: Option<usize>,
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
    /// Apply a Hann taper before spectra.
    #[arg(long, overrides_with = "no_window")]
    pub window: bool,
    #[arg(long, overrides_with = "window")]
    pub no_window: bool,
    #[arg(long)]
    pub max_radius_km: Option<f64>,
    #[arg(long)]
    pub bin_width_km: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub bicubic_a: Option<f64>,
    #[arg(long)]
    pub clamp_output: bool,
    /// Suppress the summary table on stdout.
    #[arg(short, long)]
    pub quiet: bool,
}

#[derive(Args, Debug)]
pub struct PlotArgs {
    /// `k,E` or `r_km,gamma[,pairs]` CSVs; each file becomes one line.
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    #[arg(short, long)]
    pub output: PathBuf,
    #[arg(long)]
    pub title: Option<String>,
}

#[derive(Args, Debug)]
pub struct SynthArgs {
    #[arg(short, long)]
    pub output: PathBuf,
    #[arg(long, default_value_t = 100)]
    pub width: usize,
    #[arg(long, default_value_t = 100)]
    pub height: usize,
    #[arg(long, default_value_t = -5.0 / 3.0, allow_negative_numbers = true)]
    pub exponent: f64,
    #[arg(long)]
    pub k_max: Option<usize>,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub mean: f64,
    #[arg(long, default_value_t = 1.0)]
    pub std: f64,
    #[arg(long, default_value = "generic")]
    pub variable: VariableKind,
    #[arg(long, default_value_t = 2.0)]
    pub spacing_km: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Ingest(a) => commands::ingest(a),
        Command::Build(a) => commands::build(a),
        Command::Upsample(a) => commands::upsample(a),
        Command::Bench(a) => commands::bench(a),
        Command::Plot(a) => commands::plot(a),
        Command::Synth(a) => commands::synth(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
