use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::interp::{InterpKernel, KernelKind, DEFAULT_BICUBIC_A};
use crate::metrics::SsimParams;

/// Reserved label for ground-truth diagnostics in reports.
pub const GROUND_TRUTH: &str = "ground_truth";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelSource {
    #[serde(alias = "nearest")]
    BuiltinNearest,
    #[serde(alias = "bilinear")]
    BuiltinBilinear,
    #[serde(alias = "bicubic")]
    BuiltinBicubic,
    /// Directory holding one `<entry-id>.wssr` (or `.png`) per entry.
    ExternalDir(PathBuf),
}

impl ModelSource {
    pub fn builtin_kernel(&self) -> Option<KernelKind> {
        match self {
            ModelSource::BuiltinNearest => Some(KernelKind::Nearest),
            ModelSource::BuiltinBilinear => Some(KernelKind::Bilinear),
            ModelSource::BuiltinBicubic => Some(KernelKind::Bicubic),
            ModelSource::ExternalDir(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub name: String,
    pub source: ModelSource,
    /// External outputs are colormapped PNGs instead of WSSR files.
    #[serde(default)]
    pub png: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricFlags {
    pub psnr: bool,
    pub ssim: bool,
    pub mse_rel: bool,
    pub mae: bool,
}

impl Default for MetricFlags {
    fn default() -> Self {
        MetricFlags {
            psnr: true,
            ssim: true,
            mse_rel: true,
            mae: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiagnosticFlags {
    pub spectrum: bool,
    pub semivariogram: bool,
    pub histogram: bool,
    /// Write `spectrum.svg` / `semivariogram.svg`.
    pub plots: bool,
    pub hann_window: bool,
    pub max_radius_km: f64,
    /// Defaults to the HR pixel spacing.
    pub bin_width_km: Option<f64>,
    pub histogram_bins: usize,
}

impl Default for DiagnosticFlags {
    fn default() -> Self {
        DiagnosticFlags {
            spectrum: false,
            semivariogram: false,
            histogram: false,
            plots: false,
            hann_window: false,
            max_radius_km: 20.0,
            bin_width_km: None,
            histogram_bins: 20,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SsimOverrides {
    pub window: Option<usize>,
    pub gaussian_sigma: Option<f64>,
    pub k1: Option<f64>,
    pub k2: Option<f64>,
    /// Replaces the manifest's global range span.
    pub data_range: Option<f64>,
}

impl SsimOverrides {
    pub fn apply(&self, data_range: f64) -> SsimParams {
        let mut p = SsimParams::with_range(self.data_range.unwrap_or(data_range));
        if let Some(w) = self.window {
            p.window = w;
        }
        if let Some(s) = self.gaussian_sigma {
            p.gaussian_sigma = s;
        }
        if let Some(k) = self.k1 {
            p.k1 = k;
        }
        if let Some(k) = self.k2 {
            p.k2 = k;
        }
        p
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InterpOptions {
    pub bicubic_a: f64,
    /// Clamp builtin outputs to the LR declared range.
    pub clamp_output: bool,
}

impl Default for InterpOptions {
    fn default() -> Self {
        InterpOptions {
            bicubic_a: DEFAULT_BICUBIC_A,
            clamp_output: false,
        }
    }
}

impl InterpOptions {
    pub fn kernel(&self, kind: KernelKind) -> InterpKernel {
        InterpKernel {
            kind,
            bicubic_a: self.bicubic_a,
        }
    }
}

fn default_parallelism() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchmarkConfig {
    pub manifest_path: PathBuf,
    /// Second manifest evaluated alongside the first; a Ua/Va pair enables
    /// joint kinetic energy spectra.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub companion_manifest_path: Option<PathBuf>,
    pub models: Vec<ModelSpec>,
    pub factor: usize,
    #[serde(default)]
    pub metrics: MetricFlags,
    #[serde(default)]
    pub diagnostics: DiagnosticFlags,
    #[serde(default)]
    pub ssim: SsimOverrides,
    #[serde(default)]
    pub interp: InterpOptions,
    pub output_dir: PathBuf,
    #[serde(default = "default_parallelism")]
    pub parallelism: usize,
}

fn valid_model_name(name: &str) -> bool {
    !name.is_empty()
        && name
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'))
}

impl BenchmarkConfig {
    pub fn validate(&self) -> Result<()> {
        if self.models.is_empty() {
            return Err(Error::Config("at least one model is required".into()));
        }
        let mut names = HashSet::new();
        for m in &self.models {
            if !valid_model_name(&m.name) {
                return Err(Error::Config(format!(
                    "model name {:?} must be non-empty [A-Za-z0-9_.-]",
                    m.name
                )));
            }
            if m.name == GROUND_TRUTH {
                return Err(Error::Config(format!(
                    "model name {GROUND_TRUTH:?} is reserved"
                )));
            }
            if !names.insert(m.name.as_str()) {
                return Err(Error::Config(format!("duplicate model name {:?}", m.name)));
            }
            if m.png && m.source.builtin_kernel().is_some() {
                return Err(Error::Config(format!(
                    "model {:?}: png applies to external_dir sources only",
                    m.name
                )));
            }
        }
        if self.factor < 2 {
            return Err(Error::Config(format!("factor {} < 2", self.factor)));
        }
        if self.parallelism == 0 {
            return Err(Error::Config("parallelism must be at least 1".into()));
        }
        self.interp.kernel(KernelKind::Bicubic).validate()?;
        let d = &self.diagnostics;
        if d.histogram && d.histogram_bins == 0 {
            return Err(Error::Config("histogram_bins must be at least 1".into()));
        }
        if d.semivariogram {
            let bw = d.bin_width_km.unwrap_or(d.max_radius_km);
            if !(bw > 0.0 && d.max_radius_km >= bw) {
                return Err(Error::Config(format!(
                    "semivariogram needs max_radius_km {} >= bin_width_km {bw} > 0",
                    d.max_radius_km
                )));
            }
        }
        Ok(())
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Reads a `.json` or TOML config; relative paths are resolved against
    /// the config file's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = match path.extension().and_then(|e| e.to_str()) {
            Some("json") => Self::from_json(&text)?,
            _ => Self::from_toml(&text)?,
        };
        let base = path.parent().unwrap_or(Path::new(""));
        cfg.resolve_paths(base);
        Ok(cfg)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.manifest_path);
        if let Some(p) = self.companion_manifest_path.as_mut() {
            fix(p);
        }
        fix(&mut self.output_dir);
        for m in &mut self.models {
            if let ModelSource::ExternalDir(p) = &mut m.source {
                fix(p);
            }
        }
    }

    /// SHA-256 over the canonical JSON form, excluding `parallelism`, which
    /// never changes results.
    pub fn hash_hex(&self) -> String {
        let mut canonical = self.clone();
        canonical.parallelism = 1;
        let bytes = serde_json::to_vec(&canonical).expect("config serializes");
        hex::encode(Sha256::digest(&bytes))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
manifest_path = "data/manifest.json"
factor = 5
output_dir = "out"
parallelism = 4

[[models]]
name = "bicubic"
source = "builtin_bicubic"

[[models]]
name = "nn"
source = "nearest"

[[models]]
name = "esrgan"
source = { external_dir = "outputs/esrgan" }

[diagnostics]
spectrum = true
max_radius_km = 20.0
"#;

    #[test]
    fn parses_toml() {
        let cfg = BenchmarkConfig::from_toml(SAMPLE).unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.models.len(), 3);
        assert_eq!(cfg.models[1].source, ModelSource::BuiltinNearest);
        assert_eq!(
            cfg.models[2].source,
            ModelSource::ExternalDir(PathBuf::from("outputs/esrgan"))
        );
        assert!(cfg.metrics.psnr && cfg.metrics.mae);
        assert!(cfg.diagnostics.spectrum && !cfg.diagnostics.semivariogram);
        assert_eq!(cfg.interp.bicubic_a, -0.5);
    }

    #[test]
    fn resolves_relative_paths() {
        let mut cfg = BenchmarkConfig::from_toml(SAMPLE).unwrap();
        cfg.resolve_paths(Path::new("/runs/a"));
        assert_eq!(
            cfg.manifest_path,
            PathBuf::from("/runs/a/data/manifest.json")
        );
        assert_eq!(cfg.output_dir, PathBuf::from("/runs/a/out"));
        assert_eq!(
            cfg.models[2].source,
            ModelSource::ExternalDir(PathBuf::from("/runs/a/outputs/esrgan"))
        );
    }

    #[test]
    fn json_round_trip() {
        let cfg = BenchmarkConfig::from_toml(SAMPLE).unwrap();
        let json = serde_json::to_string(&cfg).unwrap();
        assert_eq!(BenchmarkConfig::from_json(&json).unwrap(), cfg);
    }

    #[test]
    fn validation_errors() {
        let base = BenchmarkConfig::from_toml(SAMPLE).unwrap();
        let mut c = base.clone();
        c.models.clear();
        assert!(c.validate().is_err());
        let mut c = base.clone();
        c.models[1].name = "bicubic".into();
        assert!(c.validate().is_err());
        let mut c = base.clone();
        c.models[0].name = GROUND_TRUTH.into();
        assert!(c.validate().is_err());
        let mut c = base.clone();
        c.models[0].name = "a/b".into();
        assert!(c.validate().is_err());
        let mut c = base.clone();
        c.parallelism = 0;
        assert!(c.validate().is_err());
        let mut c = base.clone();
        c.interp.bicubic_a = 0.5;
        assert!(c.validate().is_err());
        assert!(BenchmarkConfig::from_toml("factor = 5").is_err());
        assert!(BenchmarkConfig::from_toml(&format!("{SAMPLE}\nbogus = 1")).is_err());
    }

    #[test]
    fn hash_ignores_parallelism() {
        let a = BenchmarkConfig::from_toml(SAMPLE).unwrap();
        let mut b = a.clone();
        b.parallelism = 8;
        assert_eq!(a.hash_hex(), b.hash_hex());
        b.factor = 4;
        assert_ne!(a.hash_hex(), b.hash_hex());
    }

    #[test]
    fn ssim_overrides() {
        let o = SsimOverrides {
            window: Some(7),
            ..Default::default()
        };
        let p = o.apply(40.0);
        assert_eq!((p.window, p.gaussian_sigma, p.data_range), (7, 1.5, 40.0));
    }
}
