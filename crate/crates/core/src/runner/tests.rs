use std::fs;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::ingest::{build_dataset, save_dataset, ChipSpec};
use crate::io::{encode_colormap_png, save_png, write_field_file};
use crate::synth::{synthetic_field, PowerLawSpectrum};

/// 40x40 field chipped into four 20x20 entries, factor 5.
fn make_dataset(dir: &Path, variable: VariableKind, seed: u64) -> PathBuf {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spec = PowerLawSpectrum::band_limited(6, -5.0 / 3.0);
    let f = synthetic_field(40, 40, &spec, 5.0, 2.0, variable, 2.0, &mut rng).unwrap();
    let (m, pairs) = build_dataset("test", &[f], ChipSpec::new(20, 20).unwrap(), 5).unwrap();
    save_dataset(dir, &m, &pairs).unwrap()
}

fn config(manifest: PathBuf, out: PathBuf, models: Vec<ModelSpec>) -> BenchmarkConfig {
    BenchmarkConfig {
        manifest_path: manifest,
        companion_manifest_path: None,
        models,
        factor: 5,
        metrics: MetricFlags::default(),
        diagnostics: DiagnosticFlags::default(),
        ssim: SsimOverrides::default(),
        interp: InterpOptions::default(),
        output_dir: out,
        parallelism: 1,
    }
}

fn builtin(name: &str, source: ModelSource) -> ModelSpec {
    ModelSpec {
        name: name.into(),
        source,
        png: false,
    }
}

/// Copies every HR raster into `out` under its entry id, as a perfect model would.
fn copy_truth(manifest: &Path, out: &Path) {
    fs::create_dir_all(out).unwrap();
    let m = load_manifest(manifest).unwrap();
    let dir = manifest.parent().unwrap();
    for e in &m.entries {
        fs::copy(dir.join(&e.hr_path), out.join(format!("{}.wssr", e.id))).unwrap();
    }
}

#[test]
fn perfect_model_scores_ideal() {
    let tmp = tempfile::tempdir().unwrap();
    let manifest = make_dataset(&tmp.path().join("data"), VariableKind::Dni, 1);
    let perfect = tmp.path().join("perfect");
    copy_truth(&manifest, &perfect);
    let cfg = config(
        manifest,
        tmp.path().join("out"),
        vec![builtin("perfect", ModelSource::ExternalDir(perfect))],
    );
    let report = run_benchmark(&cfg).unwrap();
    assert_eq!(report.exit_code(), 0);
    assert_eq!(report.per_entry.len(), 4);
    let mean = report.models[0].summary("dni").unwrap().mean;
    assert_eq!(mean.psnr_db, Some(f64::INFINITY));
    assert_eq!(mean.ssim, Some(1.0));
    assert_eq!(mean.mse_rel, Some(0.0));
    assert_eq!(mean.mae, Some(0.0));

    let written = emit_report(&report, &cfg.output_dir).unwrap();
    assert_eq!(written.len(), 3);
    let summary = fs::read_to_string(cfg.output_dir.join("summary.csv")).unwrap();
    assert_eq!(
        summary,
        "model,variable,entries,psnr,ssim,mse_rel,mae\nperfect,dni,4,inf,1,0,0\n"
    );
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(cfg.output_dir.join("report.json")).unwrap())
            .unwrap();
    assert_eq!(json["models"][0]["summaries"][0]["mean"]["psnr_db"], "inf");
}

#[test]
fn row_counts_and_aggregate_means() {
    let tmp = tempfile::tempdir().unwrap();
    let manifest = make_dataset(&tmp.path().join("data"), VariableKind::Dhi, 2);
    let cfg = config(
        manifest,
        tmp.path().join("out"),
        vec![
            builtin("bicubic", ModelSource::BuiltinBicubic),
            builtin("nearest", ModelSource::BuiltinNearest),
        ],
    );
    let report = run_benchmark(&cfg).unwrap();
    assert_eq!(report.per_entry.len(), 8);
    assert!(report.failures.is_empty());
    for m in &report.models {
        assert_eq!(m.summaries.len(), 1);
        let rows: Vec<&EntryRecord> = report
            .per_entry
            .iter()
            .filter(|r| r.model == m.name)
            .collect();
        assert_eq!(rows.len(), 4);
        for metric in Metric::ALL {
            let naive = rows
                .iter()
                .map(|r| r.metrics.get(metric).unwrap())
                .sum::<f64>()
                / 4.0;
            let agg = m.summaries[0].mean.get(metric).unwrap();
            assert!((agg - naive).abs() <= 1e-12, "{metric:?}");
        }
    }
    let ids: Vec<&str> = report.per_entry[..4]
        .iter()
        .map(|r| r.entry_id.as_str())
        .collect();
    assert_eq!(ids, ["0_0_0", "0_0_1", "0_1_0", "0_1_1"]);
    let b = report.model("bicubic").unwrap().summaries[0]
        .mean
        .psnr_db
        .unwrap();
    let n = report.model("nearest").unwrap().summaries[0]
        .mean
        .psnr_db
        .unwrap();
    assert!(b > n);

    emit_report(&report, &cfg.output_dir).unwrap();
    let per_entry = fs::read_to_string(cfg.output_dir.join("per_entry.csv")).unwrap();
    assert_eq!(per_entry.lines().count(), 9);
    let summary = fs::read_to_string(cfg.output_dir.join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 3);
}

#[test]
fn missing_output_is_a_failure() {
    let tmp = tempfile::tempdir().unwrap();
    let manifest = make_dataset(&tmp.path().join("data"), VariableKind::Dni, 3);
    let ext = tmp.path().join("ext");
    copy_truth(&manifest, &ext);
    fs::remove_file(ext.join("0_0_1.wssr")).unwrap();
    let cfg = config(
        manifest,
        tmp.path().join("out"),
        vec![builtin("ext", ModelSource::ExternalDir(ext))],
    );
    let report = run_benchmark(&cfg).unwrap();
    assert_eq!(report.exit_code(), 1);
    assert_eq!(report.per_entry.len(), 3);
    assert_eq!(
        report.failures,
        vec![Failure {
            model: "ext".into(),
            variable: "dni".into(),
            entry_id: "0_0_1".into(),
            reason: "missing output".into(),
        }]
    );
    assert_eq!(report.models[0].summaries[0].entries, 3);
}

#[test]
fn dimension_mismatch_is_a_failure() {
    let tmp = tempfile::tempdir().unwrap();
    let manifest = make_dataset(&tmp.path().join("data"), VariableKind::Dni, 4);
    let ext = tmp.path().join("ext");
    copy_truth(&manifest, &ext);
    let small = Field2D::constant(10, 10, VariableKind::Dni, 2.0, 1.0).unwrap();
    write_field_file(&small, ext.join("0_1_1.wssr")).unwrap();
    let cfg = config(
        manifest,
        tmp.path().join("out"),
        vec![builtin("ext", ModelSource::ExternalDir(ext))],
    );
    let report = run_benchmark(&cfg).unwrap();
    assert_eq!(report.failures.len(), 1);
    assert!(report.failures[0].reason.starts_with("dimension mismatch"));
}

#[test]
fn unreadable_manifest_aborts() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config(
        tmp.path().join("nope.json"),
        tmp.path().join("out"),
        vec![builtin("b", ModelSource::BuiltinBilinear)],
    );
    assert!(run_benchmark(&cfg).is_err());

    let manifest = make_dataset(&tmp.path().join("data"), VariableKind::Dni, 5);
    let mut cfg = config(manifest, tmp.path().join("out"), cfg.models);
    cfg.factor = 4;
    assert!(matches!(run_benchmark(&cfg), Err(Error::Config(_))));
}

#[test]
fn diagnostics_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let manifest = make_dataset(&tmp.path().join("data"), VariableKind::Dni, 6);
    let mut cfg = config(
        manifest,
        tmp.path().join("out"),
        vec![builtin("bilinear", ModelSource::BuiltinBilinear)],
    );
    cfg.diagnostics = DiagnosticFlags {
        spectrum: true,
        semivariogram: true,
        histogram: true,
        plots: true,
        ..Default::default()
    };
    let report = run_and_emit(&cfg).unwrap();
    let mut names: Vec<String> = fs::read_dir(&cfg.output_dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(
        names,
        [
            "histogram_mae_bilinear.csv",
            "histogram_mse_rel_bilinear.csv",
            "histogram_psnr_bilinear.csv",
            "histogram_ssim_bilinear.csv",
            "per_entry.csv",
            "report.json",
            "semivariogram.svg",
            "semivariogram_bilinear.csv",
            "semivariogram_ground_truth.csv",
            "spectrum.svg",
            "spectrum_bilinear.csv",
            "spectrum_ground_truth.csv",
            "summary.csv",
        ]
    );
    let spectrum = fs::read_to_string(cfg.output_dir.join("spectrum_bilinear.csv")).unwrap();
    let lines: Vec<&str> = spectrum.lines().collect();
    assert_eq!(lines[0], "k,E");
    assert_eq!(lines.len(), 1 + 10);
    assert!(lines[1].starts_with("1,"));

    let variogram = &report.ground_truth.semivariograms["dni"];
    // bins of width 2 km up to 20 km
    assert_eq!(variogram.radii_km.first(), Some(&3.0));
    assert_eq!(report.models[0].histograms["psnr"].total(), 4);
}

#[test]
fn parallelism_does_not_change_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let manifest = make_dataset(&tmp.path().join("data"), VariableKind::Dhi, 7);
    let models = vec![
        builtin("bicubic", ModelSource::BuiltinBicubic),
        builtin("bilinear", ModelSource::BuiltinBilinear),
    ];
    let mut outputs = Vec::new();
    for threads in [1, 4] {
        let mut cfg = config(
            manifest.clone(),
            tmp.path().join(format!("out{threads}")),
            models.clone(),
        );
        cfg.parallelism = threads;
        cfg.diagnostics.spectrum = true;
        cfg.diagnostics.semivariogram = true;
        let report = run_and_emit(&cfg).unwrap();
        let read = |n: &str| fs::read(cfg.output_dir.join(n)).unwrap();
        outputs.push((
            read("summary.csv"),
            read("per_entry.csv"),
            read("spectrum_bicubic.csv"),
            read("semivariogram_bilinear.csv"),
            report.models,
        ));
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn wind_pair_reports_joint_rows() {
    let tmp = tempfile::tempdir().unwrap();
    let ua = make_dataset(&tmp.path().join("ua"), VariableKind::Ua, 8);
    let va = make_dataset(&tmp.path().join("va"), VariableKind::Va, 9);
    let ext = tmp.path().join("ext");
    copy_truth(&ua, &ext.join("ua"));
    copy_truth(&va, &ext.join("va"));
    // the companion listed first is reordered so that ua leads
    let mut cfg = config(
        va,
        tmp.path().join("out"),
        vec![
            builtin("ext", ModelSource::ExternalDir(ext)),
            builtin("bicubic", ModelSource::BuiltinBicubic),
        ],
    );
    cfg.companion_manifest_path = Some(ua);
    cfg.diagnostics.spectrum = true;
    cfg.diagnostics.semivariogram = true;
    let report = run_and_emit(&cfg).unwrap();
    assert!(report.failures.is_empty(), "{:?}", report.failures);
    assert_eq!(report.metadata.variables, ["ua", "va"]);
    let rows: Vec<&str> = report.models[1]
        .summaries
        .iter()
        .map(|s| s.variable.as_str())
        .collect();
    assert_eq!(rows, ["ua", "va", WIND_PAIR_LABEL]);
    let m = &report.models[1];
    let pooled = m.summary(WIND_PAIR_LABEL).unwrap();
    assert_eq!(pooled.entries, 8);
    let avg = (m.summaries[0].mean.mae.unwrap() + m.summaries[1].mean.mae.unwrap()) / 2.0;
    assert!((pooled.mean.mae.unwrap() - avg).abs() < 1e-12);

    let truth = report.ground_truth.spectrum.as_ref().unwrap();
    let perfect = report.models[0].diagnostics.spectrum.as_ref().unwrap();
    assert_eq!(truth, perfect);
    for f in [
        "semivariogram_ext_ua.csv",
        "semivariogram_ext_va.csv",
        "spectrum_ext.csv",
    ] {
        assert!(cfg.output_dir.join(f).is_file(), "{f}");
    }
}

#[test]
fn png_outputs_decode_within_quantization() {
    let tmp = tempfile::tempdir().unwrap();
    let manifest_path = make_dataset(&tmp.path().join("data"), VariableKind::Dni, 10);
    let m = load_manifest(&manifest_path).unwrap();
    let ext = tmp.path().join("png");
    fs::create_dir_all(&ext).unwrap();
    for e in &m.entries {
        let hr = read_field_file(manifest_path.parent().unwrap().join(&e.hr_path)).unwrap();
        let img = encode_colormap_png(&hr, &ColormapLut::inferno(), m.global_range).unwrap();
        save_png(&img, ext.join(format!("{}.png", e.id))).unwrap();
    }
    let cfg = config(
        manifest_path,
        tmp.path().join("out"),
        vec![ModelSpec {
            name: "png".into(),
            source: ModelSource::ExternalDir(ext),
            png: true,
        }],
    );
    let report = run_benchmark(&cfg).unwrap();
    assert!(report.failures.is_empty());
    let mae = report.models[0].summaries[0].mean.mae.unwrap();
    assert!(mae <= m.global_range.span() / 510.0 + 1e-12, "{mae}");
    assert!(report.metadata.warnings.iter().any(|w| w.contains("PNG")));
}

#[test]
fn disabled_metrics_are_blank() {
    let tmp = tempfile::tempdir().unwrap();
    let manifest = make_dataset(&tmp.path().join("data"), VariableKind::Dni, 11);
    let mut cfg = config(
        manifest,
        tmp.path().join("out"),
        vec![builtin("nn", ModelSource::BuiltinNearest)],
    );
    cfg.metrics.ssim = false;
    cfg.metrics.mae = false;
    run_and_emit(&cfg).unwrap();
    let summary = fs::read_to_string(cfg.output_dir.join("summary.csv")).unwrap();
    let row: Vec<&str> = summary.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row.len(), 7);
    assert!(!row[3].is_empty() && row[4].is_empty() && !row[5].is_empty() && row[6].is_empty());
}
