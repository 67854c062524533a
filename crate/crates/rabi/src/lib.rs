//! Command-line driver for `rabi-core`: parameter scans written as CSV
//! datasets, each with a JSON run manifest that reproduces it.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod grid;
pub mod io;
pub mod manifest;
pub mod scans;

use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use anyhow::Context;
use rabi_core::RandomStream;

use crate::cli::{Command, OUT_DIR_ENV};
use crate::manifest::{manifest_path, RunManifest};

/// Invalid combination of arguments; the binary exits with status 2.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct UsageError(pub String);

/// Where `command` writes when `--out` is absent.
pub fn default_output(command: &Command) -> PathBuf {
    let dir = std::env::var_os(OUT_DIR_ENV).map(PathBuf::from).unwrap_or_default();
    dir.join(format!("{}.csv", command.name()))
}

/// Run `command`, write its tables and manifest, and return the manifest.
pub fn execute(command: &Command) -> anyhow::Result<RunManifest> {
    let started = Instant::now();
    let started_at = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let mut resolved = command.clone();
    let out = resolved.common().out.clone().unwrap_or_else(|| default_output(command));
    resolved.common_mut().out = Some(out.clone());
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }

    let data = match &resolved {
        Command::ScanWidth(a) => scans::scan_width(a, &out)?,
        Command::ScanArea(a) => scans::scan_area(a, &out)?,
        Command::Densities(a) => scans::densities(a, &out)?,
        Command::G2grid(a) => scans::g2grid(a, &out)?,
        Command::Distribution(a) => scans::distribution(a, &out)?,
    };
    for (path, table) in &data.tables {
        table.write_file(path)?;
    }
    let manifest = RunManifest {
        tool: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        csv_schema: io::CSV_SCHEMA.into(),
        seed: resolved.common().seed,
        rng: RandomStream::ALGORITHM.into(),
        started_at,
        wall_clock_seconds: started.elapsed().as_secs_f64(),
        outputs: data.tables.iter().map(|(p, _)| p.clone()).collect(),
        summary: data.summary,
        failed_rows: data.rows.iter().filter(|r| r.failed()).count(),
        rows: data.rows,
        command: resolved,
    };
    manifest.write(&manifest_path(&out))?;
    Ok(manifest)
}

/// Execute the command stored in a manifest, optionally to a new path.
pub fn rerun(manifest: &Path, out: Option<PathBuf>) -> anyhow::Result<RunManifest> {
    let mut command = RunManifest::read(manifest)?.command;
    if out.is_some() {
        command.common_mut().out = out;
    }
    execute(&command)
}
