//! JSON dataset manifests.

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{ValueRange, VariableKind};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestEntry {
    pub id: String,
    pub hr_path: String,
    pub lr_path: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetManifest {
    pub dataset_name: String,
    pub variable: VariableKind,
    /// High-resolution pixel spacing.
    pub pixel_spacing_km: f64,
    pub factor: usize,
    pub global_range: ValueRange,
    pub entries: Vec<ManifestEntry>,
}

impl DatasetManifest {
    pub fn validate(&self) -> Result<()> {
        if self.factor < 2 {
            return Err(Error::InvalidManifest(format!(
                "factor {} must be at least 2",
                self.factor
            )));
        }
        if !(self.pixel_spacing_km.is_finite() && self.pixel_spacing_km > 0.0) {
            return Err(Error::InvalidManifest(format!(
                "pixel spacing {} km",
                self.pixel_spacing_km
            )));
        }
        let r = self.global_range;
        if !(r.min.is_finite() && r.max.is_finite() && r.min < r.max) {
            return Err(Error::InvalidManifest(format!(
                "global range [{}, {}] must satisfy min < max",
                r.min, r.max
            )));
        }
        let mut ids = HashSet::with_capacity(self.entries.len());
        for e in &self.entries {
            if !ids.insert(e.id.as_str()) {
                return Err(Error::DuplicateEntryId(e.id.clone()));
            }
        }
        Ok(())
    }

    pub fn lr_pixel_spacing_km(&self) -> f64 {
        self.pixel_spacing_km * self.factor as f64
    }

    /// One-line human summary.
    pub fn summary(&self) -> String {
        format!(
            "{}: {} entries of {}, {}x factor, HR {} km / LR {} km, range [{}, {}]",
            self.dataset_name,
            self.entries.len(),
            self.variable,
            self.factor,
            self.pixel_spacing_km,
            self.lr_pixel_spacing_km(),
            self.global_range.min,
            self.global_range.max
        )
    }

    pub fn entry(&self, id: &str) -> Option<&ManifestEntry> {
        self.entries.iter().find(|e| e.id == id)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let m: DatasetManifest =
            serde_json::from_str(text).map_err(|e| Error::InvalidManifest(e.to_string()))?;
        m.validate()?;
        Ok(m)
    }

    pub fn to_json(&self) -> Result<String> {
        self.validate()?;
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }
}

/// Resolves a manifest-relative path.
pub fn resolve_entry_path(manifest_dir: &Path, rel: &str) -> PathBuf {
    let p = Path::new(rel);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        manifest_dir.join(p)
    }
}

pub fn load_manifest(path: impl AsRef<Path>) -> Result<DatasetManifest> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    DatasetManifest::from_json(&text)
}

pub fn save_manifest(m: &DatasetManifest, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, m.to_json()?).map_err(|e| Error::io(path, e))
}
