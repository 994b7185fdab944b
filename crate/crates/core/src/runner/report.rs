use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::{DiagnosticFlags, GROUND_TRUTH};
use crate::error::{Error, Result};
use crate::metrics::{Histogram, Metric, MetricsReport};
use crate::plot::{render_svg, semivariogram_chart, spectrum_chart};
use crate::serde_float::format_non_finite;
use crate::spectrum::SpectrumSeries;
use crate::variogram::Semivariogram;

/// Label of the pooled Ua/Va row.
pub const WIND_PAIR_LABEL: &str = "ua+va";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntryRecord {
    pub model: String,
    pub variable: String,
    pub entry_id: String,
    pub metrics: MetricsReport,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Failure {
    pub model: String,
    pub variable: String,
    pub entry_id: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariableSummary {
    pub variable: String,
    pub entries: usize,
    pub mean: MetricsReport,
}

/// Spectrum and semivariograms of one field source (a model or the ground truth).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<SpectrumSeries>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub semivariograms: BTreeMap<String, Semivariogram>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelReport {
    pub name: String,
    pub summaries: Vec<VariableSummary>,
    /// Keyed by metric name; one value per entry id (mean over variables).
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub histograms: BTreeMap<String, Histogram>,
    pub diagnostics: Diagnostics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub tool_version: String,
    pub started_unix_s: f64,
    pub finished_unix_s: f64,
    pub config_sha256: String,
    pub parallelism: usize,
    pub datasets: Vec<String>,
    pub variables: Vec<String>,
    pub diagnostics: DiagnosticFlags,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub metadata: RunMetadata,
    pub models: Vec<ModelReport>,
    pub ground_truth: Diagnostics,
    pub per_entry: Vec<EntryRecord>,
    pub failures: Vec<Failure>,
}

impl BenchmarkReport {
    /// 0 when every unit succeeded, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.failures.is_empty() {
            0
        } else {
            1
        }
    }

    pub fn model(&self, name: &str) -> Option<&ModelReport> {
        self.models.iter().find(|m| m.name == name)
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }
}

impl ModelReport {
    pub fn summary(&self, variable: &str) -> Option<&VariableSummary> {
        self.summaries.iter().find(|s| s.variable == variable)
    }
}

pub(crate) fn format_value(v: Option<f64>) -> String {
    match v {
        None => String::new(),
        Some(x) if x.is_finite() => x.to_string(),
        Some(x) => format_non_finite(x),
    }
}

fn metric_cells(m: &MetricsReport) -> impl Iterator<Item = String> + '_ {
    Metric::ALL.into_iter().map(|k| format_value(m.get(k)))
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::Writer::from_writer(file))
}

fn metric_header(lead: &[&str]) -> Vec<String> {
    lead.iter()
        .map(|s| s.to_string())
        .chain(Metric::ALL.into_iter().map(|m| m.name().to_string()))
        .collect()
}

fn write_spectrum_csv(path: &Path, s: &SpectrumSeries) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["k", "E"])?;
    for (k, e) in s.wavenumbers.iter().zip(&s.energy) {
        w.write_record([k.to_string(), e.to_string()])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn write_semivariogram_csv(path: &Path, v: &Semivariogram) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["r_km", "gamma", "pairs"])?;
    for i in 0..v.radii_km.len() {
        w.write_record([
            v.radii_km[i].to_string(),
            v.gamma[i].to_string(),
            v.pair_counts[i].to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn write_histogram_csv(path: &Path, h: &Histogram) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["bin_lo", "bin_hi", "count"])?;
    for (i, c) in h.counts.iter().enumerate() {
        w.write_record([
            h.edges[i].to_string(),
            h.edges[i + 1].to_string(),
            c.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn semivariogram_file(label: &str, variable: &str, multi: bool) -> String {
    if multi {
        format!("semivariogram_{label}_{variable}.csv")
    } else {
        format!("semivariogram_{label}.csv")
    }
}

/// Writes `summary.csv`, `per_entry.csv` and `report.json`, plus the
/// diagnostic CSVs and SVG charts that the run produced. Returns the paths
/// written, in order.
pub fn emit_report(report: &BenchmarkReport, out_dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let dir = out_dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();

    let path = dir.join("summary.csv");
    let mut w = csv_writer(&path)?;
    let mut header = metric_header(&["model", "variable"]);
    header.insert(2, "entries".into());
    w.write_record(&header)?;
    for m in &report.models {
        for s in &m.summaries {
            let mut row = vec![m.name.clone(), s.variable.clone(), s.entries.to_string()];
            row.extend(metric_cells(&s.mean));
            w.write_record(&row)?;
        }
    }
    w.flush().map_err(|e| Error::io(&path, e))?;
    written.push(path);

    let path = dir.join("per_entry.csv");
    let mut w = csv_writer(&path)?;
    w.write_record(metric_header(&["model", "variable", "entry_id"]))?;
    for r in &report.per_entry {
        let mut row = vec![r.model.clone(), r.variable.clone(), r.entry_id.clone()];
        row.extend(metric_cells(&r.metrics));
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::io(&path, e))?;
    written.push(path);

    let multi = report.metadata.variables.len() > 1;
    let sources = std::iter::once((GROUND_TRUTH, &report.ground_truth)).chain(
        report
            .models
            .iter()
            .map(|m| (m.name.as_str(), &m.diagnostics)),
    );
    for (label, d) in sources {
        if let Some(s) = &d.spectrum {
            let path = dir.join(format!("spectrum_{label}.csv"));
            write_spectrum_csv(&path, s)?;
            written.push(path);
        }
        for (var, v) in &d.semivariograms {
            let path = dir.join(semivariogram_file(label, var, multi));
            write_semivariogram_csv(&path, v)?;
            written.push(path);
        }
    }
    for m in &report.models {
        for (metric, h) in &m.histograms {
            let path = dir.join(format!("histogram_{metric}_{}.csv", m.name));
            write_histogram_csv(&path, h)?;
            written.push(path);
        }
    }

    if report.metadata.diagnostics.plots {
        let named = || {
            std::iter::once((GROUND_TRUTH.to_string(), &report.ground_truth)).chain(
                report
                    .models
                    .iter()
                    .map(|m| (m.name.clone(), &m.diagnostics)),
            )
        };
        let spectra: Vec<(String, SpectrumSeries)> = named()
            .filter_map(|(n, d)| d.spectrum.clone().map(|s| (n, s)))
            .collect();
        if !spectra.is_empty() {
            let path = dir.join("spectrum.svg");
            fs::write(&path, render_svg(&spectrum_chart(&spectra)))
                .map_err(|e| Error::io(&path, e))?;
            written.push(path);
        }
        let variograms: Vec<(String, Semivariogram)> = named()
            .flat_map(|(n, d)| {
                d.semivariograms.iter().map(move |(var, v)| {
                    let label = if multi {
                        format!("{n} {var}")
                    } else {
                        n.clone()
                    };
                    (label, v.clone())
                })
            })
            .collect();
        if !variograms.is_empty() {
            let path = dir.join("semivariogram.svg");
            fs::write(&path, render_svg(&semivariogram_chart(&variograms)))
                .map_err(|e| Error::io(&path, e))?;
            written.push(path);
        }
    }

    let path = dir.join("report.json");
    fs::write(&path, report.to_json()?).map_err(|e| Error::io(&path, e))?;
    written.push(path);
    Ok(written)
}
