//! Pulse inputs and CSV output.

use std::fmt;
use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context};
use rabi_core::PulseShape;
use serde::{Deserialize, Serialize};

use crate::UsageError;

/// CSV schema version written into every manifest.
pub const CSV_SCHEMA: &str = "1";

/// `--pulse` argument.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum PulseArg {
    Square,
    Gaussian,
    Tabulated(PathBuf),
}

impl FromStr for PulseArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "square" => Ok(PulseArg::Square),
            "gaussian" => Ok(PulseArg::Gaussian),
            _ => match s.strip_prefix("tabulated:") {
                Some(path) if !path.is_empty() => Ok(PulseArg::Tabulated(PathBuf::from(path))),
                _ => Err(format!("unknown pulse {s:?} (square, gaussian or tabulated:<path>)")),
            },
        }
    }
}

impl fmt::Display for PulseArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PulseArg::Square => f.write_str("square"),
            PulseArg::Gaussian => f.write_str("gaussian"),
            PulseArg::Tabulated(p) => write!(f, "tabulated:{}", p.display()),
        }
    }
}

impl TryFrom<String> for PulseArg {
    type Error = String;
    fn try_from(s: String) -> Result<Self, String> {
        s.parse()
    }
}

impl From<PulseArg> for String {
    fn from(p: PulseArg) -> String {
        p.to_string()
    }
}

/// Time axis of a tabulated envelope file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum TimeUnit {
    /// Times in units of the emitter lifetime `1/gamma`, rates in `gamma`.
    Lifetime,
    /// Times in seconds and rates in rad/s; needs `--gamma` in 1/s.
    Seconds,
}

#[derive(Debug, Deserialize)]
struct EnvelopeRow {
    t: f64,
    omega: f64,
}

/// Read `t,omega` samples, converted to units of `1/gamma`.
pub fn load_envelope(path: &Path, unit: TimeUnit, gamma: Option<f64>) -> anyhow::Result<Vec<(f64, f64)>> {
    let scale = match (unit, gamma) {
        (TimeUnit::Lifetime, _) => 1.0,
        (TimeUnit::Seconds, Some(g)) if g > 0.0 && g.is_finite() => g,
        (TimeUnit::Seconds, _) => return Err(UsageError("--time-unit seconds needs --gamma <rate in 1/s>".into()).into()),
    };
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("opening envelope file {}", path.display()))?;
    let headers = reader.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != ["t", "omega"] {
        bail!("{}: expected header `t,omega`, found `{}`", path.display(), headers.iter().collect::<Vec<_>>().join(","));
    }
    let mut samples = Vec::new();
    for (line, row) in reader.deserialize::<EnvelopeRow>().enumerate() {
        let row = row.with_context(|| format!("{}: bad row {}", path.display(), line + 2))?;
        samples.push((row.t * scale, row.omega / scale));
    }
    Ok(samples)
}

/// Pulse of total area `area` (radians) and nominal width `gamma_t` in
/// units of `1/gamma`. Tabulated envelopes are stretched in time so that
/// their sampled span equals `gamma_t` and starts at zero.
pub fn build_pulse(arg: &PulseArg, samples: Option<&[(f64, f64)]>, area: f64, gamma_t: f64) -> anyhow::Result<PulseShape> {
    let shape = match arg {
        PulseArg::Square => PulseShape::square(area, gamma_t)?,
        PulseArg::Gaussian => PulseShape::gaussian(area, gamma_t)?,
        PulseArg::Tabulated(path) => {
            let samples = samples.with_context(|| format!("envelope samples for {} were not loaded", path.display()))?;
            let (first, last) = match (samples.first(), samples.last()) {
                (Some(a), Some(b)) if b.0 > a.0 => (a.0, b.0),
                _ => bail!("{}: need at least two increasing samples", path.display()),
            };
            let stretch = gamma_t / (last - first);
            let scaled: Vec<(f64, f64)> = samples.iter().map(|&(t, w)| ((t - first) * stretch, w / stretch)).collect();
            PulseShape::tabulated(&scaled, Some(area))?
        }
    };
    Ok(shape)
}

/// One CSV field.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Num)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

/// Seventeen significant digits, enough to round-trip any `f64`.
pub fn format_number(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        String::new()
    }
}

/// Header plus rows, written in order.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Table { header: header.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write_to<W: Write>(&self, out: W) -> anyhow::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|c| match c {
                Cell::Num(v) => format_number(*v),
                Cell::Text(s) => s.clone(),
                Cell::Empty => String::new(),
            }))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_file(&self, path: &Path) -> anyhow::Result<()> {
        let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
        self.write_to(std::io::BufWriter::new(file))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pulse_arg_round_trip() {
        for s in ["square", "gaussian", "tabulated:a/b.csv"] {
            assert_eq!(s.parse::<PulseArg>().unwrap().to_string(), s);
        }
        assert!("tabulated:".parse::<PulseArg>().is_err());
        assert!("lorentzian".parse::<PulseArg>().is_err());
    }

    #[test]
    fn numbers_keep_seventeen_digits() {
        let v = 0.1 + 0.2;
        let s = format_number(v);
        assert_eq!(s, "3.0000000000000004e-1");
        assert_eq!(s.parse::<f64>().unwrap(), v);
        assert_eq!(format_number(f64::NAN), "");
    }

    #[test]
    fn table_output() {
        let mut t = Table::new(&["x", "y", "backend"]);
        t.push(vec![1.0.into(), None.into(), "exact".into()]);
        let mut buf = Vec::new();
        t.write_to(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "x,y,backend\n1.0000000000000000e0,,exact\n");
    }
}
