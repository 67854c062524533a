//! Run manifests written next to every dataset.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::{Deserialize, Serialize};

use crate::cli::Command;

/// Outcome of one scan point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowRecord {
    /// Position in the output (grid index, then backend).
    pub index: usize,
    /// Scan coordinates and backend of the row.
    pub point: BTreeMap<String, String>,
    /// Numerical error estimate reported by the backend.
    pub err_est: Option<f64>,
    /// Diagnostic flags such as `truncation_sensitive`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub flags: Vec<String>,
    /// Failure message; the CSV row then carries empty fields.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl RowRecord {
    pub fn new(index: usize, point: &[(&str, String)]) -> Self {
        RowRecord {
            index,
            point: point.iter().map(|(k, v)| (k.to_string(), v.clone())).collect(),
            err_est: None,
            flags: Vec::new(),
            error: None,
        }
    }

    pub fn failed(&self) -> bool {
        self.error.is_some()
    }
}

/// Provenance of a dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub csv_schema: String,
    /// Fully resolved command; `rabi rerun` executes it again.
    pub command: Command,
    pub seed: u64,
    pub rng: String,
    /// Seconds since the Unix epoch.
    pub started_at: u64,
    pub wall_clock_seconds: f64,
    pub outputs: Vec<PathBuf>,
    /// Dataset-level results that do not fit a CSV row.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub summary: BTreeMap<String, f64>,
    pub rows: Vec<RowRecord>,
    pub failed_rows: usize,
}

impl RunManifest {
    pub fn write(&self, path: &Path) -> anyhow::Result<()> {
        let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
        serde_json::to_writer_pretty(BufWriter::new(file), self)?;
        Ok(())
    }

    pub fn read(path: &Path) -> anyhow::Result<Self> {
        let file = File::open(path).with_context(|| format!("opening manifest {}", path.display()))?;
        serde_json::from_reader(std::io::BufReader::new(file)).with_context(|| format!("parsing manifest {}", path.display()))
    }
}

/// `out/scan.csv` -> `out/scan.manifest.json`.
pub fn manifest_path(csv: &Path) -> PathBuf {
    csv.with_extension("manifest.json")
}

/// `out/scan.csv` -> `out/scan_<suffix>.csv`.
pub fn sibling_path(csv: &Path, suffix: &str) -> PathBuf {
    let stem = csv.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    csv.with_file_name(format!("{stem}_{suffix}.csv"))
}
