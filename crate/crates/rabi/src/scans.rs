//! Dataset generation for each subcommand.
//!
//! Rows are computed on the rayon pool and collected in grid order, so the
//! CSV bytes do not depend on scheduling. A failing row keeps its scan
//! coordinates, leaves the computed fields empty and records the error in
//! the manifest.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use rabi_core::analytic::ShortPulseModel;
use rabi_core::oracle::{
    count_distribution, g2_two_time, number_resolved_distribution, photon_moments, two_time_grid, OracleConfig,
    TrajectorySampler,
};
use rabi_core::{statistics, EmissionStatistics, PhotocountDistribution, PulseShape, RandomStream, SystemParams};
use rayon::prelude::*;

use crate::cli::{Backend, Common, DensitiesArgs, DistributionArgs, G2GridArgs, ScanAreaArgs, ScanWidthArgs};
use crate::io::{build_pulse, load_envelope, Cell, PulseArg, Table};
use crate::manifest::{sibling_path, RowRecord};
use crate::UsageError;

/// Photon numbers resolved by the distribution backends.
const N_MAX: usize = 3;

/// Largest accepted `g2grid` resolution per axis.
pub const MAX_G2_POINTS: usize = 256;

/// Tables and per-row records of one run.
#[derive(Debug, Default)]
pub struct Dataset {
    pub tables: Vec<(PathBuf, Table)>,
    pub rows: Vec<RowRecord>,
    pub summary: BTreeMap<String, f64>,
}

/// Pulse family plus numerical settings shared by all rows.
pub struct Setup {
    pulse: PulseArg,
    samples: Option<Vec<(f64, f64)>>,
    pub sys: SystemParams,
    pub cfg: OracleConfig,
    pub seed: u64,
}

impl Setup {
    pub fn new(common: &Common) -> anyhow::Result<Self> {
        if !(common.tol > 0.0 && common.tol < 1.0) {
            return Err(UsageError(format!("--tol must lie in (0, 1), got {}", common.tol)).into());
        }
        let samples = match &common.pulse {
            PulseArg::Tabulated(path) => Some(load_envelope(path, common.time_unit, common.gamma)?),
            _ => None,
        };
        let mut cfg = OracleConfig::default();
        cfg.quadrature.rel_tol = common.tol;
        cfg.ode.rel_tol = (common.tol * 1e-4).clamp(1e-13, 1e-6);
        Ok(Setup { pulse: common.pulse.clone(), samples, sys: SystemParams::default(), cfg, seed: common.seed })
    }

    /// Pulse of area `area_pi * pi` and width `gamma_t` (with `gamma = 1`).
    pub fn pulse(&self, area_pi: f64, gamma_t: f64) -> anyhow::Result<PulseShape> {
        build_pulse(&self.pulse, self.samples.as_deref(), area_pi * PI, gamma_t)
    }

    fn model<'a>(&self, pulse: &'a PulseShape) -> ShortPulseModel<'a> {
        ShortPulseModel::new(pulse, self.sys).with_quadrature(self.cfg.quadrature)
    }

    fn analytic(&self, pulse: &PulseShape) -> anyhow::Result<PhotocountDistribution> {
        Ok(self.model(pulse).exclusive_pn(N_MAX)?)
    }

    fn exact(&self, pulse: &PulseShape) -> anyhow::Result<PhotocountDistribution> {
        Ok(number_resolved_distribution(pulse, self.sys, N_MAX, &self.cfg)?)
    }

    fn monte_carlo(&self, pulse: &PulseShape, n_traj: usize) -> anyhow::Result<Vec<usize>> {
        if n_traj < 2 {
            return Err(UsageError("--trajectories must be at least 2".into()).into());
        }
        let sampler = TrajectorySampler::new(pulse, self.sys, RandomStream::new(self.seed), self.cfg);
        let counts = (0..n_traj as u64)
            .into_par_iter()
            .map(|i| sampler.sample(i).map(|r| r.count))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(counts)
    }
}

/// Expand `all`, sort and deduplicate, and reject backends outside
/// `supported`.
pub fn resolve_backends(requested: &[Backend], supported: &[Backend], command: &str) -> anyhow::Result<Vec<Backend>> {
    let mut out = Vec::new();
    for &b in requested {
        if b == Backend::All {
            out.extend_from_slice(supported);
        } else if supported.contains(&b) {
            out.push(b);
        } else {
            let names: Vec<_> = supported.iter().map(|b| b.label()).collect();
            return Err(UsageError(format!("{command} supports --backend {}, not {}", names.join(","), b.label())).into());
        }
    }
    out.sort();
    out.dedup();
    if out.is_empty() {
        return Err(UsageError(format!("{command} needs at least one backend")).into());
    }
    Ok(out)
}

/// Collects per-row fields and diagnostics; errors accumulate instead of
/// aborting the row.
struct RowBuilder {
    cells: Vec<Cell>,
    record: RowRecord,
}

impl RowBuilder {
    fn new(index: usize, width: usize, point: &[(&str, String)]) -> Self {
        RowBuilder { cells: vec![Cell::Empty; width], record: RowRecord::new(index, point) }
    }

    fn set(&mut self, col: usize, value: impl Into<Cell>) {
        self.cells[col] = value.into();
    }

    fn error_est(&mut self, e: f64) {
        self.record.err_est = Some(self.record.err_est.map_or(e, |x| x.max(e)));
    }

    fn flag(&mut self, flag: &str) {
        self.record.flags.push(flag.to_string());
    }

    /// Run `f`, recording its error under `what`.
    fn attempt<T>(&mut self, what: &str, f: impl FnOnce() -> anyhow::Result<T>) -> Option<T> {
        match f() {
            Ok(v) => Some(v),
            Err(e) => {
                let msg = format!("{what}: {e:#}");
                self.record.error = Some(match self.record.error.take() {
                    Some(prev) => format!("{prev}; {msg}"),
                    None => msg,
                });
                None
            }
        }
    }

    fn finish(self, table: &mut Table, rows: &mut Vec<RowRecord>) {
        table.push(self.cells);
        rows.push(self.record);
    }
}

fn num(v: f64) -> String {
    crate::io::format_number(v)
}

fn check_distribution(row: &mut RowBuilder, d: &PhotocountDistribution) {
    row.error_est(d.error_estimate());
    if EmissionStatistics::summarize(d).truncation_sensitive {
        row.flag("truncation_sensitive");
    }
    let mass: f64 = d.exclusive().iter().sum::<f64>() + d.truncation_bound();
    if mass < 1.0 - 1e-6 {
        row.flag("normalization_deficit");
    }
}

/// Relative variance `Var(n)/E[n]` from the first two factorial moments.
fn var_rel_from_moments(mean: f64, second_factorial: f64) -> Option<f64> {
    (mean > 0.0).then(|| (second_factorial + mean - mean * mean) / mean)
}

/// `(E[n], E[n(n-1)])` of raw photon counts.
fn count_moments(counts: &[usize]) -> (f64, f64) {
    let n = counts.len() as f64;
    let mean = counts.iter().map(|&c| c as f64).sum::<f64>() / n;
    let fact = counts.iter().map(|&c| (c * c.saturating_sub(1)) as f64).sum::<f64>() / n;
    (mean, fact)
}

pub fn scan_width(args: &ScanWidthArgs, out: &Path) -> anyhow::Result<Dataset> {
    let setup = Setup::new(&args.common)?;
    let backends = resolve_backends(&args.backend, &[Backend::Analytic, Backend::Exact], "scan-width")?;
    let header = ["gammaT", "P1_analytic", "P2_analytic", "P1_exact", "P2_exact", "g2_analytic", "g2_exact", "err_est"];
    let grid = args.gamma_t.values();
    let built: Vec<RowBuilder> = grid
        .par_iter()
        .enumerate()
        .map(|(i, &gt)| {
            let mut row = RowBuilder::new(i, header.len(), &[("gammaT", num(gt))]);
            row.set(0, gt);
            let Some(pulse) = row.attempt("pulse", || setup.pulse(args.area, gt)) else { return row };
            if backends.contains(&Backend::Analytic) {
                if let Some(d) = row.attempt("analytic", || setup.analytic(&pulse)) {
                    row.set(1, d.p(1));
                    row.set(2, d.p(2));
                    row.set(5, statistics::g2_zero(&d).ok());
                    check_distribution(&mut row, &d);
                }
            }
            if backends.contains(&Backend::Exact) {
                if let Some(d) = row.attempt("exact", || setup.exact(&pulse)) {
                    row.set(3, d.p(1));
                    row.set(4, d.p(2));
                    row.error_est(d.error_estimate());
                }
                if let Some(m) = row.attempt("exact moments", || Ok(photon_moments(&pulse, setup.sys, &setup.cfg)?)) {
                    row.set(6, m.g2_zero().ok());
                }
            }
            row.set(7, row.record.err_est);
            row
        })
        .collect();
    let mut data = Dataset::default();
    let mut table = Table::new(&header);
    built.into_iter().for_each(|r| r.finish(&mut table, &mut data.rows));
    data.tables.push((out.to_path_buf(), table));
    Ok(data)
}

pub fn scan_area(args: &ScanAreaArgs, out: &Path) -> anyhow::Result<Dataset> {
    let setup = Setup::new(&args.common)?;
    let backends =
        resolve_backends(&args.backend, &[Backend::Analytic, Backend::Exact, Backend::MonteCarlo], "scan-area")?;
    let header = ["area", "P1_ideal", "P1", "P2", "En", "g2", "var_rel", "backend"];
    let areas = args.area.values();
    if areas.iter().any(|&a| !(a >= 0.0)) {
        return Err(UsageError("--area values must be >= 0".into()).into());
    }
    let points: Vec<(f64, Backend)> = areas.iter().flat_map(|&a| backends.iter().map(move |&b| (a, b))).collect();
    let built: Vec<RowBuilder> = points
        .par_iter()
        .enumerate()
        .map(|(i, &(a, b))| {
            let mut row = RowBuilder::new(i, header.len(), &[("area", num(a)), ("backend", b.label().into())]);
            row.set(0, a);
            row.set(1, rabi_core::analytic::ideal_excited_prob(a * PI));
            row.set(7, b.label());
            let Some(pulse) = row.attempt("pulse", || setup.pulse(a, args.gamma_t)) else { return row };
            match b {
                Backend::Analytic => {
                    if let Some(d) = row.attempt("analytic", || setup.analytic(&pulse)) {
                        let s = EmissionStatistics::summarize(&d);
                        row.set(2, d.p(1));
                        row.set(3, d.p(2));
                        row.set(4, s.mean_n);
                        row.set(5, s.g2_zero);
                        row.set(6, s.var_rel);
                        check_distribution(&mut row, &d);
                    }
                }
                Backend::Exact => {
                    if let Some(d) = row.attempt("exact", || setup.exact(&pulse)) {
                        row.set(2, d.p(1));
                        row.set(3, d.p(2));
                        row.error_est(d.error_estimate());
                    }
                    if let Some(m) = row.attempt("exact moments", || Ok(photon_moments(&pulse, setup.sys, &setup.cfg)?)) {
                        row.set(4, m.mean);
                        row.set(5, m.g2_zero().ok());
                        row.set(6, var_rel_from_moments(m.mean, m.second_factorial));
                    }
                }
                Backend::MonteCarlo => {
                    if let Some(counts) = row.attempt("monte-carlo", || setup.monte_carlo(&pulse, args.trajectories)) {
                        let (mean, fact) = count_moments(&counts);
                        if let Some(d) = row.attempt("histogram", || Ok(count_distribution(counts.iter().copied(), N_MAX)?)) {
                            row.set(2, d.p(1));
                            row.set(3, d.p(2));
                            row.error_est(d.error_estimate());
                        }
                        row.set(4, mean);
                        row.set(5, (mean > 0.0).then(|| fact / (mean * mean)));
                        row.set(6, var_rel_from_moments(mean, fact));
                    }
                }
                Backend::All => unreachable!("expanded by resolve_backends"),
            }
            row
        })
        .collect();
    let mut data = Dataset::default();
    let mut table = Table::new(&header);
    built.into_iter().for_each(|r| r.finish(&mut table, &mut data.rows));
    data.tables.push((out.to_path_buf(), table));
    Ok(data)
}

pub fn distribution(args: &DistributionArgs, out: &Path) -> anyhow::Result<Dataset> {
    let setup = Setup::new(&args.common)?;
    let backends =
        resolve_backends(&args.backend, &[Backend::Analytic, Backend::Exact, Backend::MonteCarlo], "distribution")?;
    let header = ["gammaT", "P0", "P1", "P2", "P3", "pi1", "pi2", "pi3", "backend"];
    let points: Vec<(f64, Backend)> =
        args.gamma_t.values().into_iter().flat_map(|g| backends.iter().map(move |&b| (g, b))).collect();
    let built: Vec<RowBuilder> = points
        .par_iter()
        .enumerate()
        .map(|(i, &(gt, b))| {
            let mut row = RowBuilder::new(i, header.len(), &[("gammaT", num(gt)), ("backend", b.label().into())]);
            row.set(0, gt);
            row.set(8, b.label());
            let Some(pulse) = row.attempt("pulse", || setup.pulse(args.area, gt)) else { return row };
            let d = match b {
                Backend::Analytic => row.attempt("analytic", || setup.analytic(&pulse)),
                Backend::Exact => row.attempt("exact", || setup.exact(&pulse)),
                Backend::MonteCarlo => row.attempt("monte-carlo", || {
                    let counts = setup.monte_carlo(&pulse, args.trajectories)?;
                    Ok(count_distribution(counts, N_MAX)?)
                }),
                Backend::All => unreachable!("expanded by resolve_backends"),
            };
            if let Some(d) = d {
                for n in 0..=N_MAX {
                    row.set(1 + n, d.p(n));
                }
                if let Ok(pi) = statistics::purities(&d) {
                    for (n, p) in pi.into_iter().enumerate() {
                        row.set(5 + n, p);
                    }
                }
                check_distribution(&mut row, &d);
            }
            row
        })
        .collect();
    let mut data = Dataset::default();
    let mut table = Table::new(&header);
    built.into_iter().for_each(|r| r.finish(&mut table, &mut data.rows));
    data.tables.push((out.to_path_buf(), table));
    Ok(data)
}

/// Evenly spaced fractions `0..=1` of a pulse area.
fn area_axis(total: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| total * i as f64 / (n - 1) as f64).collect()
}

pub fn densities(args: &DensitiesArgs, out: &Path) -> anyhow::Result<Dataset> {
    let setup = Setup::new(&args.common)?;
    resolve_backends(&args.backend, &[Backend::Analytic], "densities")?;
    if args.points < 2 || args.points_2d < 2 {
        return Err(UsageError("--points and --points-2d must be at least 2".into()).into());
    }
    if !(args.area > 0.0) {
        return Err(UsageError("densities need --area > 0".into()).into());
    }
    let pulse = setup.pulse(args.area, args.gamma_t)?;
    let model = setup.model(&pulse);
    let total = pulse.total_area();
    let mut data = Dataset::default();

    let header = ["A_t1", "Pe_no_jump", "p1", "p2", "p3"];
    let axis = area_axis(total, args.points);
    let built: Vec<RowBuilder> = axis
        .par_iter()
        .enumerate()
        .map(|(i, &a)| {
            let mut row = RowBuilder::new(i, header.len(), &[("A_t1", num(a / PI))]);
            row.set(0, a / PI);
            row.set(1, rabi_core::analytic::ideal_excited_prob(a));
            let Some(t) = row.attempt("inverse area", || Ok(pulse.inverse_area(a)?)) else { return row };
            if let Some(m) = row.attempt("p1", || Ok(model.marginal_p1(t)?)) {
                row.set(2, m.value.value);
                row.error_est(m.value.error);
            }
            if let Some(m) = row.attempt("p2", || Ok(model.marginal_p2(t)?)) {
                row.set(3, m.value.value);
                row.error_est(m.value.error);
            }
            if let Some(m) = row.attempt("p3", || Ok(model.p3_first_marginal(t)?)) {
                row.set(4, m.value);
                row.error_est(m.error);
            }
            row
        })
        .collect();
    let mut table = Table::new(&header);
    built.into_iter().for_each(|r| r.finish(&mut table, &mut data.rows));
    data.tables.push((out.to_path_buf(), table));

    let axis2 = area_axis(total, args.points_2d);
    let times: Vec<f64> = axis2.iter().map(|&a| pulse.inverse_area(a)).collect::<Result<_, _>>()?;
    let pairs: Vec<(usize, usize)> = (0..axis2.len()).flat_map(|i| (0..axis2.len()).map(move |j| (i, j))).collect();
    let values: Vec<(f64, rabi_core::Result<rabi_core::Estimate>)> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let (t1, t2) = (times[i], times[j]);
            let joint = if t2 > t1 { model.density_p2_joint(t1, t2).unwrap_or(f64::NAN) } else { 0.0 };
            (joint, model.p3_sym_pair(t1, t2))
        })
        .collect();
    let mut joint = Table::new(&["A_t1", "A_t2", "p2_joint"]);
    let mut sym = Table::new(&["A_t1", "A_t2", "p3_sym"]);
    let mut max_err: f64 = 0.0;
    for (k, (&(i, j), (p2, p3))) in pairs.iter().zip(values).enumerate() {
        let (a1, a2) = (axis2[i] / PI, axis2[j] / PI);
        joint.push(vec![a1.into(), a2.into(), p2.into()]);
        let p3 = match p3 {
            Ok(e) => {
                max_err = max_err.max(e.error);
                Cell::Num(e.value)
            }
            Err(e) => {
                let mut rec = RowRecord::new(data.rows.len(), &[("file", "p3_sym".into()), ("index", k.to_string())]);
                rec.error = Some(e.to_string());
                data.rows.push(rec);
                Cell::Empty
            }
        };
        sym.push(vec![a1.into(), a2.into(), p3]);
    }
    data.summary.insert("p3_sym_max_err_est".into(), max_err);
    data.tables.push((sibling_path(out, "p2_joint"), joint));
    data.tables.push((sibling_path(out, "p3_sym"), sym));
    Ok(data)
}

pub fn g2grid(args: &G2GridArgs, out: &Path) -> anyhow::Result<Dataset> {
    let setup = Setup::new(&args.common)?;
    resolve_backends(&args.backend, &[Backend::Exact], "g2grid")?;
    if !(4..=MAX_G2_POINTS).contains(&args.points) {
        return Err(UsageError(format!("--points must lie in 4..={MAX_G2_POINTS}")).into());
    }
    if !(args.tail > 0.0) {
        return Err(UsageError("--tail must be > 0".into()).into());
    }
    let pulse = setup.pulse(args.area, args.gamma_t)?;
    let n_pulse = args.points / 2;
    let n_tail = args.points - n_pulse + 1;
    let t_end = pulse.support_end();
    let grid = two_time_grid(&pulse, n_pulse, n_tail, t_end + args.tail)?;
    let corr = g2_two_time(&pulse, setup.sys, &grid, &grid, &setup.cfg)?;

    let mut table = Table::new(&["t1", "t2", "G2"]);
    for (i, &t1) in grid.iter().enumerate() {
        for (j, &t2) in grid.iter().enumerate() {
            table.push(vec![t1.into(), t2.into(), corr.values[i][j].into()]);
        }
    }
    let diagonal = (0..grid.len()).map(|i| corr.values[i][i]).fold(0.0, f64::max);
    let mut data = Dataset::default();
    data.summary.insert("g2_pulsewise".into(), corr.pulsewise_g2()?);
    data.summary.insert("sliver_fraction".into(), corr.weight_fraction_before(t_end)?);
    data.summary.insert("G2_max".into(), corr.max_value());
    data.summary.insert("G2_diagonal_max".into(), diagonal);
    data.summary.insert("pulse_end".into(), t_end);
    data.rows = grid.iter().enumerate().map(|(i, &t)| RowRecord::new(i, &[("t1", num(t))])).collect();
    data.tables.push((out.to_path_buf(), table));
    Ok(data)
}
