//! Benchmark orchestration: evaluates every (model, entry) unit, aggregates
//! metrics and diagnostics, and writes the report files.
//!
//! Units run on a dedicated thread pool, but results are collected in
//! (model, entry id) order and every reduction runs sequentially in that
//! order, so outputs are identical for any degree of parallelism.

mod config;
mod report;

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use rayon::prelude::*;

pub use config::{
    BenchmarkConfig, DiagnosticFlags, InterpOptions, MetricFlags, ModelSource, ModelSpec,
    SsimOverrides, GROUND_TRUTH,
};
pub use report::{
    emit_report, BenchmarkReport, Diagnostics, EntryRecord, Failure, ModelReport, RunMetadata,
    VariableSummary, WIND_PAIR_LABEL,
};

use crate::error::{Error, Result};
use crate::field::{Field2D, VariableKind};
use crate::interp::upsample_with;
use crate::io::manifest::resolve_entry_path;
use crate::io::wssr::EXTENSION;
use crate::io::{
    decode_colormap_png, load_manifest, load_png, read_field_file, ColormapLut, ColormapName,
    DatasetManifest, ManifestEntry,
};
use crate::metrics::{
    mae, metric_distribution, mse_rel, psnr, ssim, Metric, MetricsReport, SsimParams,
};
use crate::spectrum::{
    average_series, energy_spectrum, energy_spectrum_scalar, SpectrumOptions, SpectrumSeries,
};
use crate::variogram::{average_semivariograms, semivariogram, Semivariogram};

struct Dataset {
    manifest: DatasetManifest,
    dir: PathBuf,
    /// External outputs live in `<dir>/<subdir>/` when two datasets are evaluated.
    subdir: Option<&'static str>,
    ssim: SsimParams,
    bin_width_km: f64,
}

impl Dataset {
    fn variable(&self) -> VariableKind {
        self.manifest.variable
    }
}

struct VarOutcome {
    dataset: usize,
    result: std::result::Result<MetricsReport, String>,
}

#[derive(Default)]
struct UnitDiagnostics {
    spectrum: Option<SpectrumSeries>,
    semivariograms: Vec<(usize, Semivariogram)>,
    warnings: Vec<String>,
}

struct UnitOutcome {
    model: usize,
    id: String,
    vars: Vec<VarOutcome>,
    diagnostics: UnitDiagnostics,
}

fn now_unix_s() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0)
}

fn load_dataset(cfg: &BenchmarkConfig, path: &Path, paired: bool) -> Result<Dataset> {
    let manifest = load_manifest(path)?;
    manifest.validate()?;
    if manifest.factor != cfg.factor {
        return Err(Error::Config(format!(
            "config factor {} does not match manifest {} factor {}",
            cfg.factor,
            path.display(),
            manifest.factor
        )));
    }
    let dir = path.parent().unwrap_or(Path::new("")).to_path_buf();
    Ok(Dataset {
        subdir: paired.then(|| manifest.variable.name()),
        ssim: cfg.ssim.apply(manifest.global_range.span()),
        bin_width_km: cfg
            .diagnostics
            .bin_width_km
            .unwrap_or(manifest.pixel_spacing_km),
        dir,
        manifest,
    })
}

fn is_wind_pair(datasets: &[Dataset]) -> bool {
    datasets.len() == 2
        && datasets[0].variable() == VariableKind::Ua
        && datasets[1].variable() == VariableKind::Va
}

fn external_path(dir: &Path, d: &Dataset, id: &str, png: bool) -> PathBuf {
    let base = match d.subdir {
        Some(s) => dir.join(s),
        None => dir.to_path_buf(),
    };
    base.join(format!("{id}.{}", if png { "png" } else { EXTENSION }))
}

fn produce(
    cfg: &BenchmarkConfig,
    model: &ModelSpec,
    d: &Dataset,
    entry: &ManifestEntry,
) -> std::result::Result<Field2D, String> {
    match &model.source {
        ModelSource::ExternalDir(dir) => {
            let path = external_path(dir, d, &entry.id, model.png);
            if !path.is_file() {
                return Err("missing output".into());
            }
            let unreadable = |e: Error| format!("unreadable output: {e}");
            if model.png {
                let img = load_png(&path).map_err(unreadable)?;
                let lut = ColormapLut::by_name(ColormapName::for_variable(d.variable()))
                    .expect("builtin colormap");
                decode_colormap_png(
                    &img,
                    &lut,
                    d.manifest.global_range,
                    d.variable(),
                    d.manifest.pixel_spacing_km,
                )
                .map_err(unreadable)
            } else {
                read_field_file(&path).map_err(unreadable)
            }
        }
        source => {
            let kind = source.builtin_kernel().expect("builtin source");
            let lr = read_field_file(resolve_entry_path(&d.dir, &entry.lr_path))
                .map_err(|e| format!("unreadable input: {e}"))?;
            upsample_with(
                &lr,
                d.manifest.factor,
                cfg.interp.kernel(kind),
                cfg.interp.clamp_output,
            )
            .map_err(|e| e.to_string())
        }
    }
}

fn load_truth(d: &Dataset, entry: &ManifestEntry) -> std::result::Result<Field2D, String> {
    read_field_file(resolve_entry_path(&d.dir, &entry.hr_path))
        .map_err(|e| format!("unreadable ground truth: {e}"))
}

fn score(
    flags: MetricFlags,
    d: &Dataset,
    sr: &Field2D,
    hr: &Field2D,
) -> std::result::Result<MetricsReport, String> {
    if sr.dims() != hr.dims() {
        return Err(format!(
            "dimension mismatch: output {}x{}, ground truth {}x{}",
            sr.width(),
            sr.height(),
            hr.width(),
            hr.height()
        ));
    }
    let e = |e: Error| e.to_string();
    let span = d.manifest.global_range.span();
    Ok(MetricsReport {
        psnr_db: flags
            .psnr
            .then(|| psnr(sr, hr, span))
            .transpose()
            .map_err(e)?,
        ssim: flags
            .ssim
            .then(|| ssim(sr, hr, &d.ssim))
            .transpose()
            .map_err(e)?,
        mse_rel: flags
            .mse_rel
            .then(|| mse_rel(sr, hr))
            .transpose()
            .map_err(e)?,
        mae: flags.mae.then(|| mae(sr, hr)).transpose().map_err(e)?,
    })
}

fn diagnose(
    cfg: &BenchmarkConfig,
    datasets: &[Dataset],
    fields: &[Option<Field2D>],
    label: &str,
    id: &str,
) -> UnitDiagnostics {
    let flags = cfg.diagnostics;
    let mut out = UnitDiagnostics::default();
    if flags.spectrum {
        let opts = SpectrumOptions {
            hann_window: flags.hann_window,
        };
        if is_wind_pair(datasets) {
            if let (Some(ua), Some(va)) = (&fields[0], &fields[1]) {
                match energy_spectrum(ua, va, opts) {
                    Ok(s) => out.spectrum = Some(s),
                    Err(e) => out
                        .warnings
                        .push(format!("{label} {id}: spectrum skipped: {e}")),
                }
            }
        } else if let Some(f) = &fields[0] {
            out.spectrum = Some(energy_spectrum_scalar(f, opts));
        }
    }
    if flags.semivariogram {
        for (i, f) in fields.iter().enumerate() {
            let Some(f) = f else { continue };
            match semivariogram(f, flags.max_radius_km, datasets[i].bin_width_km) {
                Ok(v) => out.semivariograms.push((i, v)),
                Err(e) => out.warnings.push(format!(
                    "{label} {id} {}: semivariogram skipped: {e}",
                    datasets[i].variable()
                )),
            }
        }
    }
    out
}

fn diagnostics_enabled(cfg: &BenchmarkConfig) -> bool {
    cfg.diagnostics.spectrum || cfg.diagnostics.semivariogram
}

fn evaluate_unit(
    cfg: &BenchmarkConfig,
    datasets: &[Dataset],
    model: usize,
    id: &str,
) -> UnitOutcome {
    let spec = &cfg.models[model];
    let keep = diagnostics_enabled(cfg);
    let mut vars = Vec::new();
    let mut fields = Vec::with_capacity(datasets.len());
    for (di, d) in datasets.iter().enumerate() {
        let Some(entry) = d.manifest.entry(id) else {
            fields.push(None);
            continue;
        };
        let produced = load_truth(d, entry).and_then(|hr| {
            let sr = produce(cfg, spec, d, entry)?;
            score(cfg.metrics, d, &sr, &hr).map(|m| (m, sr))
        });
        let (result, field) = match produced {
            Ok((m, sr)) => (Ok(m), keep.then_some(sr)),
            Err(e) => (Err(e), None),
        };
        vars.push(VarOutcome {
            dataset: di,
            result,
        });
        fields.push(field);
    }
    let diagnostics = if keep {
        diagnose(cfg, datasets, &fields, &spec.name, id)
    } else {
        UnitDiagnostics::default()
    };
    UnitOutcome {
        model,
        id: id.to_string(),
        vars,
        diagnostics,
    }
}

fn truth_unit(
    cfg: &BenchmarkConfig,
    datasets: &[Dataset],
    id: &str,
) -> (UnitDiagnostics, Vec<String>) {
    let mut errors = Vec::new();
    let fields: Vec<Option<Field2D>> = datasets
        .iter()
        .map(|d| {
            let entry = d.manifest.entry(id)?;
            load_truth(d, entry)
                .map_err(|e| errors.push(format!("{GROUND_TRUTH} {id}: {e}")))
                .ok()
        })
        .collect();
    (diagnose(cfg, datasets, &fields, GROUND_TRUTH, id), errors)
}

fn reduce_diagnostics(
    datasets: &[Dataset],
    units: &[&UnitDiagnostics],
    label: &str,
    warnings: &mut Vec<String>,
) -> Diagnostics {
    let mut out = Diagnostics::default();
    let spectra: Vec<SpectrumSeries> = units.iter().filter_map(|u| u.spectrum.clone()).collect();
    if !spectra.is_empty() {
        match average_series(&spectra) {
            Ok(s) => out.spectrum = Some(s),
            Err(e) => warnings.push(format!("{label}: spectrum average skipped: {e}")),
        }
    }
    for (di, d) in datasets.iter().enumerate() {
        let list: Vec<Semivariogram> = units
            .iter()
            .flat_map(|u| u.semivariograms.iter())
            .filter(|(i, _)| *i == di)
            .map(|(_, v)| v.clone())
            .collect();
        if list.is_empty() {
            continue;
        }
        match average_semivariograms(&list) {
            Ok(v) => {
                out.semivariograms
                    .insert(d.variable().name().to_string(), v);
            }
            Err(e) => warnings.push(format!(
                "{label} {}: semivariogram average skipped: {e}",
                d.variable()
            )),
        }
    }
    out
}

fn histograms(
    cfg: &BenchmarkConfig,
    units: &[&UnitOutcome],
    label: &str,
    warnings: &mut Vec<String>,
) -> BTreeMap<String, crate::metrics::Histogram> {
    let mut out = BTreeMap::new();
    if !cfg.diagnostics.histogram {
        return out;
    }
    for metric in Metric::ALL {
        let mut values = Vec::new();
        let mut non_finite = 0usize;
        for u in units {
            let per_var: Vec<f64> = u
                .vars
                .iter()
                .filter_map(|v| v.result.as_ref().ok()?.get(metric))
                .collect();
            if per_var.is_empty() {
                continue;
            }
            let mean = per_var.iter().sum::<f64>() / per_var.len() as f64;
            if mean.is_finite() {
                values.push(mean);
            } else {
                non_finite += 1;
            }
        }
        if non_finite > 0 {
            warnings.push(format!(
                "{label}: {non_finite} non-finite {} value(s) left out of the histogram",
                metric.name()
            ));
        }
        if let Ok(h) = metric_distribution(&values, cfg.diagnostics.histogram_bins) {
            out.insert(metric.name().to_string(), h);
        }
    }
    out
}

/// Runs every configured model over every manifest entry. Per-unit problems
/// (missing or malformed outputs, dimension mismatches, metric errors) are
/// recorded as failures; configuration and manifest errors abort the run.
pub fn run_benchmark(cfg: &BenchmarkConfig) -> Result<BenchmarkReport> {
    let started = now_unix_s();
    cfg.validate()?;
    let paired = cfg.companion_manifest_path.is_some();
    let mut datasets = vec![load_dataset(cfg, &cfg.manifest_path, paired)?];
    if let Some(p) = &cfg.companion_manifest_path {
        let companion = load_dataset(cfg, p, true)?;
        if companion.variable() == datasets[0].variable() {
            return Err(Error::Config(format!(
                "companion manifest repeats variable {}",
                companion.variable()
            )));
        }
        datasets.push(companion);
    }
    if datasets[1..]
        .iter()
        .any(|d| d.variable() == VariableKind::Ua)
    {
        datasets.swap(0, 1);
    }

    let ids: Vec<String> = datasets
        .iter()
        .flat_map(|d| d.manifest.entries.iter().map(|e| e.id.clone()))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let tasks: Vec<(usize, &str)> = (0..cfg.models.len())
        .flat_map(|m| ids.iter().map(move |id| (m, id.as_str())))
        .collect();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.parallelism)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let (outcomes, truth): (Vec<UnitOutcome>, Vec<(UnitDiagnostics, Vec<String>)>) =
        pool.install(|| {
            let outcomes = tasks
                .par_iter()
                .map(|&(m, id)| evaluate_unit(cfg, &datasets, m, id))
                .collect();
            let truth = if diagnostics_enabled(cfg) {
                ids.par_iter()
                    .map(|id| truth_unit(cfg, &datasets, id))
                    .collect()
            } else {
                Vec::new()
            };
            (outcomes, truth)
        });

    let mut warnings = Vec::new();
    for d in &datasets {
        if cfg.models.iter().any(|m| m.png) {
            warnings.push(format!(
                "PNG outputs for {} are decoded against the manifest range [{}, {}]; quantization limits accuracy to span/255",
                d.variable(),
                d.manifest.global_range.min,
                d.manifest.global_range.max
            ));
        }
    }

    let mut per_entry = Vec::new();
    let mut failures = Vec::new();
    for u in &outcomes {
        let model = &cfg.models[u.model].name;
        for v in &u.vars {
            let variable = datasets[v.dataset].variable().name().to_string();
            match &v.result {
                Ok(m) => per_entry.push(EntryRecord {
                    model: model.clone(),
                    variable,
                    entry_id: u.id.clone(),
                    metrics: *m,
                }),
                Err(reason) => failures.push(Failure {
                    model: model.clone(),
                    variable,
                    entry_id: u.id.clone(),
                    reason: reason.clone(),
                }),
            }
        }
    }
    per_entry.sort_by_key(|r| {
        let m = cfg.models.iter().position(|s| s.name == r.model);
        let d = datasets
            .iter()
            .position(|d| d.variable().name() == r.variable);
        (m, d)
    });

    let mut models = Vec::with_capacity(cfg.models.len());
    for (mi, spec) in cfg.models.iter().enumerate() {
        let units: Vec<&UnitOutcome> = outcomes.iter().filter(|u| u.model == mi).collect();
        let mut summaries = Vec::new();
        let mut pooled = Vec::new();
        for (di, d) in datasets.iter().enumerate() {
            let reports: Vec<MetricsReport> = units
                .iter()
                .flat_map(|u| u.vars.iter())
                .filter(|v| v.dataset == di)
                .filter_map(|v| v.result.as_ref().ok().copied())
                .collect();
            summaries.push(VariableSummary {
                variable: d.variable().name().to_string(),
                entries: reports.len(),
                mean: MetricsReport::mean(&reports),
            });
            pooled.extend(reports);
        }
        if is_wind_pair(&datasets) {
            summaries.push(VariableSummary {
                variable: WIND_PAIR_LABEL.to_string(),
                entries: pooled.len(),
                mean: MetricsReport::mean(&pooled),
            });
        }
        for u in &units {
            warnings.extend(u.diagnostics.warnings.iter().cloned());
        }
        let diag_units: Vec<&UnitDiagnostics> = units.iter().map(|u| &u.diagnostics).collect();
        models.push(ModelReport {
            name: spec.name.clone(),
            summaries,
            histograms: histograms(cfg, &units, &spec.name, &mut warnings),
            diagnostics: reduce_diagnostics(&datasets, &diag_units, &spec.name, &mut warnings),
        });
    }

    for (u, errors) in &truth {
        warnings.extend(u.warnings.iter().cloned());
        warnings.extend(errors.iter().cloned());
    }
    let truth_units: Vec<&UnitDiagnostics> = truth.iter().map(|(u, _)| u).collect();
    let ground_truth = reduce_diagnostics(&datasets, &truth_units, GROUND_TRUTH, &mut warnings);

    Ok(BenchmarkReport {
        metadata: RunMetadata {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            started_unix_s: started,
            finished_unix_s: now_unix_s(),
            config_sha256: cfg.hash_hex(),
            parallelism: cfg.parallelism,
            datasets: datasets.iter().map(|d| d.manifest.summary()).collect(),
            variables: datasets
                .iter()
                .map(|d| d.variable().name().to_string())
                .collect(),
            diagnostics: cfg.diagnostics,
            warnings,
        },
        models,
        ground_truth,
        per_entry,
        failures,
    })
}

/// [`run_benchmark`] followed by [`emit_report`] into the configured output directory.
pub fn run_and_emit(cfg: &BenchmarkConfig) -> Result<BenchmarkReport> {
    let report = run_benchmark(cfg)?;
    emit_report(&report, &cfg.output_dir)?;
    Ok(report)
}

#[cfg(test)]
mod tests;
