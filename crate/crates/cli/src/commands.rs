use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use srbench_core::ingest::{
    build_dataset, rasterize_scattered, save_dataset, ChipSpec, ScatteredPoint, ScatteredPoints,
};
use srbench_core::interp::{upsample_with, InterpKernel};
use srbench_core::io::{
    encode_colormap_png, read_field_file, save_png, write_field_file, ColormapLut, ColormapName,
};
use srbench_core::metrics::{mae, mse_rel, psnr, ssim, MetricsReport, SsimParams};
use srbench_core::plot::{
    render_svg, semivariogram_chart_from_lines, spectrum_chart_from_lines, Line,
};
use srbench_core::runner::run_and_emit;
use srbench_core::synth::{synthetic_field, PowerLawSpectrum};
use srbench_core::{decompose_wind, BenchmarkConfig, BenchmarkReport, Field2D, VariableKind};

use crate::{BenchArgs, BuildArgs, IngestArgs, PlotArgs, SynthArgs, UpsampleArgs};

fn column(headers: &csv::StringRecord, name: &str, path: &Path) -> Result<usize> {
    headers
        .iter()
        .position(|h| h.trim().eq_ignore_ascii_case(name))
        .with_context(|| format!("{}: no {name:?} column", path.display()))
}

fn read_points(path: &Path, value_columns: &[&str]) -> Result<Vec<ScatteredPoints>> {
    let mut reader =
        csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    let headers = reader.headers()?.clone();
    let lat = column(&headers, "lat", path)?;
    let lon = column(&headers, "lon", path)?;
    let cols = value_columns
        .iter()
        .map(|c| column(&headers, c, path))
        .collect::<Result<Vec<_>>>()?;
    let mut out = vec![Vec::new(); cols.len()];
    for (line, rec) in reader.records().enumerate() {
        let rec = rec?;
        let num = |i: usize| -> Result<f64> {
            let s = rec.get(i).unwrap_or("").trim();
            s.parse().with_context(|| {
                format!("{}: record {}: bad number {s:?}", path.display(), line + 1)
            })
        };
        let (la, lo) = (num(lat)?, num(lon)?);
        for (pts, &c) in out.iter_mut().zip(&cols) {
            pts.push(ScatteredPoint {
                lat: la,
                lon: lo,
                value: num(c)?,
            });
        }
    }
    Ok(out.into_iter().map(ScatteredPoints::new).collect())
}

fn write_field(f: &Field2D, path: &Path) -> Result<()> {
    write_field_file(f, path).with_context(|| format!("writing {}", path.display()))?;
    println!("{} ({}x{})", path.display(), f.width(), f.height());
    Ok(())
}

pub fn ingest(a: IngestArgs) -> Result<u8> {
    fs::create_dir_all(&a.output)?;
    if a.wind {
        let pts = read_points(&a.input, &[&a.speed_column, &a.direction_column])?;
        let speed = rasterize_scattered(&pts[0], VariableKind::Speed, a.spacing_km)?;
        let direction = rasterize_scattered(&pts[1], VariableKind::Direction, a.spacing_km)?;
        let (ua, va) = decompose_wind(&speed, &direction)?;
        write_field(&ua, &a.output.join("ua.wssr"))?;
        write_field(&va, &a.output.join("va.wssr"))?;
    } else {
        let pts = read_points(&a.input, &[&a.column])?;
        let f = rasterize_scattered(&pts[0], a.variable, a.spacing_km)?;
        write_field(&f, &a.output.join(format!("{}.wssr", a.variable)))?;
    }
    Ok(0)
}

pub fn build(a: BuildArgs) -> Result<u8> {
    let fields = a
        .fields
        .iter()
        .map(|p| read_field_file(p).with_context(|| format!("reading {}", p.display())))
        .collect::<Result<Vec<_>>>()?;
    let spec = ChipSpec::new(a.chip_size, a.stride.unwrap_or(a.chip_size))?;
    let (manifest, pairs) = build_dataset(&a.name, &fields, spec, a.factor)?;
    let path = save_dataset(&a.output, &manifest, &pairs)?;
    if a.png {
        let lut = ColormapLut::by_name(ColormapName::for_variable(manifest.variable))
            .context("no builtin colormap")?;
        for sub in ["hr_png", "lr_png"] {
            fs::create_dir_all(a.output.join(sub))?;
        }
        for p in &pairs {
            for (sub, f) in [("hr_png", &p.pair.hr), ("lr_png", &p.pair.lr)] {
                let img = encode_colormap_png(f, &lut, manifest.global_range)?;
                save_png(&img, a.output.join(sub).join(format!("{}.png", p.id)))?;
            }
        }
    }
    println!("{}", manifest.summary());
    println!("{}", path.display());
    Ok(0)
}

pub fn upsample(a: UpsampleArgs) -> Result<u8> {
    let lr = read_field_file(&a.input).with_context(|| format!("reading {}", a.input.display()))?;
    let kernel = InterpKernel {
        kind: a.kernel,
        bicubic_a: a.bicubic_a,
    };
    let sr = upsample_with(&lr, a.factor, kernel, a.clamp_output)?;
    write_field(&sr, &a.output)?;
    if let Some(reference) = &a.reference {
        let hr = read_field_file(reference)
            .with_context(|| format!("reading {}", reference.display()))?;
        let span = hr.declared_range().span();
        let report = MetricsReport {
            psnr_db: Some(psnr(&sr, &hr, span)?),
            ssim: Some(ssim(&sr, &hr, &SsimParams::with_range(span))?),
            mse_rel: mse_rel(&sr, &hr).ok(),
            mae: Some(mae(&sr, &hr)?),
        };
        println!("{}", serde_json::to_string(&report)?);
    }
    Ok(0)
}

fn apply_overrides(cfg: &mut BenchmarkConfig, a: &BenchArgs) {
    if let Some(p) = a.parallelism {
        cfg.parallelism = p;
    }
    if let Some(f) = a.factor {
        cfg.factor = f;
    }
    if let Some(d) = &a.output_dir {
        cfg.output_dir = d.clone();
    }
    if a.window {
        cfg.diagnostics.hann_window = true;
    }
    if a.no_window {
        cfg.diagnostics.hann_window = false;
    }
    if let Some(r) = a.max_radius_km {
        cfg.diagnostics.max_radius_km = r;
    }
    if let Some(b) = a.bin_width_km {
        cfg.diagnostics.bin_width_km = Some(b);
    }
    if let Some(x) = a.bicubic_a {
        cfg.interp.bicubic_a = x;
    }
    if a.clamp_output {
        cfg.interp.clamp_output = true;
    }
}

fn cell(v: Option<f64>) -> String {
    match v {
        None => "-".into(),
        Some(x) if x.is_infinite() => "inf".into(),
        Some(x) => format!("{x:.4}"),
    }
}

fn print_summary(report: &BenchmarkReport) {
    println!(
        "{:<16} {:<8} {:>7} {:>10} {:>8} {:>10} {:>10}",
        "model", "variable", "entries", "psnr", "ssim", "mse_rel", "mae"
    );
    for m in &report.models {
        for s in &m.summaries {
            println!(
                "{:<16} {:<8} {:>7} {:>10} {:>8} {:>10} {:>10}",
                m.name,
                s.variable,
                s.entries,
                cell(s.mean.psnr_db),
                cell(s.mean.ssim),
                cell(s.mean.mse_rel),
                cell(s.mean.mae)
            );
        }
    }
}

pub fn bench(a: BenchArgs) -> Result<u8> {
    let mut cfg = BenchmarkConfig::load(&a.config)?;
    apply_overrides(&mut cfg, &a);
    let report = run_and_emit(&cfg)?;
    if !a.quiet {
        print_summary(&report);
    }
    for w in &report.metadata.warnings {
        eprintln!("warning: {w}");
    }
    for f in &report.failures {
        eprintln!(
            "failed: {} {} {}: {}",
            f.model, f.variable, f.entry_id, f.reason
        );
    }
    Ok(report.exit_code() as u8)
}

enum SeriesKind {
    Spectrum,
    Semivariogram,
}

fn read_series(path: &Path) -> Result<(SeriesKind, Vec<(f64, f64)>)> {
    let mut reader =
        csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    let headers = reader.headers()?.clone();
    let kind = match (headers.get(0), headers.get(1)) {
        (Some("k"), Some("E")) => SeriesKind::Spectrum,
        (Some("r_km"), Some("gamma")) => SeriesKind::Semivariogram,
        _ => bail!("{}: expected a k,E or r_km,gamma header", path.display()),
    };
    let mut points = Vec::new();
    for rec in reader.records() {
        let rec = rec?;
        let x: f64 = rec[0].trim().parse()?;
        let y: f64 = rec[1].trim().parse()?;
        points.push((x, y));
    }
    Ok((kind, points))
}

pub fn plot(a: PlotArgs) -> Result<u8> {
    let mut lines = Vec::new();
    let mut kind = None;
    for p in &a.inputs {
        let (k, points) = read_series(p)?;
        let spectrum = matches!(k, SeriesKind::Spectrum);
        if kind.is_some_and(|s| s != spectrum) {
            bail!("cannot mix spectrum and semivariogram series in one chart");
        }
        kind = Some(spectrum);
        let label = p
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        let label = label
            .strip_prefix("spectrum_")
            .or_else(|| label.strip_prefix("semivariogram_"))
            .unwrap_or(&label)
            .to_string();
        lines.push(Line {
            label,
            points,
            dashed: false,
        });
    }
    let mut chart = if kind == Some(true) {
        spectrum_chart_from_lines(lines)
    } else {
        semivariogram_chart_from_lines(lines)
    };
    if let Some(t) = a.title {
        chart.title = t;
    }
    fs::write(&a.output, render_svg(&chart))
        .with_context(|| format!("writing {}", a.output.display()))?;
    println!("{}", a.output.display());
    Ok(0)
}

pub fn synth(a: SynthArgs) -> Result<u8> {
    let spec = PowerLawSpectrum {
        exponent: a.exponent,
        k_min: 1,
        k_max: a.k_max,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let f = synthetic_field(
        a.width,
        a.height,
        &spec,
        a.mean,
        a.std,
        a.variable,
        a.spacing_km,
        &mut rng,
    )?;
    write_field(&f, &a.output)?;
    Ok(0)
}
