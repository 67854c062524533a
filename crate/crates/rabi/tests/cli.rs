use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rabi::manifest::RunManifest;

fn rabi(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rabi")).args(args).env_remove("RABI_OUT_DIR").output().expect("spawn rabi")
}

fn run_ok(args: &[&str]) {
    let out = rabi(args);
    assert!(out.status.success(), "rabi {args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
}

type Row = HashMap<String, String>;

fn read_csv(path: &Path) -> Vec<Row> {
    let mut reader = csv::Reader::from_path(path).unwrap();
    let header: Vec<String> = reader.headers().unwrap().iter().map(String::from).collect();
    reader
        .records()
        .map(|r| header.iter().cloned().zip(r.unwrap().iter().map(String::from)).collect())
        .collect()
}

fn field(row: &Row, col: &str) -> f64 {
    row[col].parse().unwrap_or_else(|_| panic!("{col} = {:?} is not a number", row[col]))
}

fn out_path(dir: &tempfile::TempDir, name: &str) -> PathBuf {
    dir.path().join(name)
}

#[test]
fn degenerate_grids_are_usage_errors() {
    for grid in ["1:1:5", "0.1:1:1", "0.1:1:0", "0:1:4:log", "1:0.5:4", ""] {
        let out = rabi(&["scan-width", "--gammaT", grid]);
        assert_eq!(out.status.code(), Some(2), "grid {grid:?}");
    }
    assert_eq!(rabi(&["g2grid", "--points", "300"]).status.code(), Some(2));
    assert_eq!(rabi(&["densities", "--backend", "exact"]).status.code(), Some(2));
    assert_eq!(rabi(&["scan-width", "--pulse", "lorentzian"]).status.code(), Some(2));
}

#[test]
fn rerun_reproduces_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let first = out_path(&dir, "a/dist.csv");
    run_ok(&[
        "distribution",
        "--gammaT",
        "0.01,0.3",
        "--backend",
        "all",
        "--trajectories",
        "2000",
        "--seed",
        "11",
        "--out",
        first.to_str().unwrap(),
    ]);
    let manifest = first.with_extension("manifest.json");
    let m = RunManifest::read(&manifest).unwrap();
    assert_eq!(m.seed, 11);
    assert_eq!(m.rng, "chacha20");
    assert_eq!(m.rows.len(), 6);
    assert_eq!(m.failed_rows, 0);
    assert!(m.rows.iter().all(|r| r.err_est.is_some()));

    let second = out_path(&dir, "b/dist.csv");
    run_ok(&["rerun", manifest.to_str().unwrap(), "--out", second.to_str().unwrap()]);
    assert_eq!(std::fs::read(&first).unwrap(), std::fs::read(&second).unwrap());

    let widths = out_path(&dir, "w.csv");
    run_ok(&["scan-width", "--gammaT", "0.01:1:5:log", "--out", widths.to_str().unwrap()]);
    let again = out_path(&dir, "w2.csv");
    run_ok(&["rerun", widths.with_extension("manifest.json").to_str().unwrap(), "--out", again.to_str().unwrap()]);
    assert_eq!(std::fs::read(&widths).unwrap(), std::fs::read(&again).unwrap());
}

#[test]
fn output_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_rabi"))
        .args(["scan-width", "--gammaT", "0.1"])
        .env("RABI_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(dir.path().join("scan-width.csv").exists());
    assert!(dir.path().join("scan-width.manifest.json").exists());
}

#[test]
fn failed_rows_set_exit_code_and_stay_in_the_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = out_path(&dir, "d.csv");
    // The short-pulse hierarchy is far outside its validity at gamma T = 10.
    let out = rabi(&["distribution", "--gammaT", "0.1,10", "--backend", "analytic", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let rows = read_csv(&path);
    assert_eq!(rows.len(), 2);
    assert!(!rows[0]["P1"].is_empty());
    assert_eq!(field(&rows[1], "gammaT"), 10.0);
    assert!(rows[1]["P1"].is_empty());
    let m = RunManifest::read(&path.with_extension("manifest.json")).unwrap();
    assert_eq!(m.failed_rows, 1);
    assert!(m.rows[1].error.as_deref().unwrap().contains("analytic"));
}

#[test]
fn scan_width_short_pulses_agree_long_pulses_diverge() {
    let dir = tempfile::tempdir().unwrap();
    let path = out_path(&dir, "w.csv");
    run_ok(&["scan-width", "--gammaT", "0.01:10:40:log", "--out", path.to_str().unwrap()]);
    let rows = read_csv(&path);
    assert_eq!(rows.len(), 40);
    for r in &rows {
        let (gt, a, e) = (field(r, "gammaT"), field(r, "P2_analytic"), field(r, "P2_exact"));
        if gt <= 0.1 {
            assert!((a - e).abs() <= 0.05 * e, "gammaT {gt}: {a} vs {e}");
        }
        if gt >= 1.0 {
            assert!((a - e).abs() > 0.15 * e, "gammaT {gt}: {a} vs {e}");
        }
    }
}

#[test]
fn scan_area_structure() {
    let dir = tempfile::tempdir().unwrap();
    let path = out_path(&dir, "a.csv");
    run_ok(&["scan-area", "--area", "0:4:41", "--backend", "analytic", "--out", path.to_str().unwrap()]);
    let rows = read_csv(&path);
    let at = |a: f64| rows.iter().find(|r| (field(r, "area") - a).abs() < 1e-9).unwrap();
    assert!(field(at(2.0), "P2") > field(at(2.0), "P1"));
    assert!(rows[0]["g2"].is_empty() && rows[0]["var_rel"].is_empty());
    assert_eq!(field(&rows[0], "En"), 0.0);
    for r in &rows {
        let a = field(r, "area");
        let ideal = (a * std::f64::consts::PI / 2.0).sin().powi(2);
        assert!((field(r, "P1_ideal") - ideal).abs() < 1e-15);
        assert_eq!(r["backend"], "analytic");
    }
    let v = |a: f64| field(at(a), "var_rel");
    assert!(v(1.0) < v(0.9) && v(1.0) < v(1.1), "{} {} {}", v(0.9), v(1.0), v(1.1));
}

/// Distinct local maxima of a square long-form grid with `A_t1 < A_t2 <=
/// A_t1 + band`, merging plateau neighbours.
fn ridge_maxima(rows: &[Row], col: &str, band: f64) -> Vec<(f64, f64)> {
    let n = (rows.len() as f64).sqrt().round() as usize;
    let v = |i: usize, j: usize| field(&rows[i * n + j], col);
    let a = |i: usize| field(&rows[i * n], "A_t1");
    let global = rows.iter().map(|r| field(r, col)).fold(0.0, f64::max);
    let mut found: Vec<(f64, f64)> = Vec::new();
    for i in 1..n - 1 {
        for j in i + 1..n - 1 {
            if a(j) - a(i) > band || v(i, j) < 1e-3 * global {
                continue;
            }
            let peak = (i - 1..=i + 1).all(|k| (j - 1..=j + 1).all(|l| v(k, l) <= v(i, j)));
            if peak && !found.iter().any(|&(x, y)| (x - a(i)).abs() < 0.15 && (y - a(j)).abs() < 0.15) {
                found.push((a(i), a(j)));
            }
        }
    }
    found
}

#[test]
fn densities_shape() {
    let dir = tempfile::tempdir().unwrap();
    let path = out_path(&dir, "d2.csv");
    run_ok(&["densities", "--area", "2", "--points", "201", "--points-2d", "41", "--out", path.to_str().unwrap()]);
    let rows = read_csv(&path);
    let p1_max = rows.iter().map(|r| field(r, "p1")).fold(0.0, f64::max);
    let at_pi = rows.iter().find(|r| (field(r, "A_t1") - 1.0).abs() < 1e-9).unwrap();
    assert!(field(at_pi, "p1") < 1e-6 * p1_max);
    let p2_peak = rows.iter().max_by(|x, y| field(x, "p2").total_cmp(&field(y, "p2"))).unwrap();
    assert!((field(p2_peak, "A_t1") - 1.0).abs() <= 0.05);

    let joint = read_csv(&dir.path().join("d2_p2_joint.csv"));
    assert_eq!(joint.len(), 41 * 41);
    assert!(joint.iter().all(|r| field(r, "A_t2") > field(r, "A_t1") || field(r, "p2_joint") == 0.0));
    assert_eq!(ridge_maxima(&read_csv(&dir.path().join("d2_p3_sym.csv")), "p3_sym", 1.5).len(), 1);

    let path4 = out_path(&dir, "d4.csv");
    run_ok(&["densities", "--area", "4", "--points", "11", "--points-2d", "81", "--out", path4.to_str().unwrap()]);
    let maxima = ridge_maxima(&read_csv(&dir.path().join("d4_p3_sym.csv")), "p3_sym", 1.5);
    assert!(maxima.len() > 2, "{maxima:?}");
}

#[test]
fn g2grid_properties() {
    let dir = tempfile::tempdir().unwrap();
    for (gt, points) in [("3.3", "96"), ("0.01", "160")] {
        let path = out_path(&dir, &format!("g{gt}.csv"));
        run_ok(&["g2grid", "--gammaT", gt, "--points", points, "--out", path.to_str().unwrap()]);
        let rows = read_csv(&path);
        let n: usize = points.parse().unwrap();
        assert_eq!(rows.len(), n * n);
        let g = |i: usize, j: usize| field(&rows[i * n + j], "G2");
        let max = rows.iter().map(|r| field(r, "G2")).fold(0.0, f64::max);
        for i in 0..n {
            assert!(g(i, i) < 1e-6 * max);
            for j in 0..i {
                assert!((g(i, j) - g(j, i)).abs() <= 1e-9 * max);
            }
        }
        let m = RunManifest::read(&path.with_extension("manifest.json")).unwrap();
        assert!(m.summary["sliver_fraction"] >= 0.95);
        assert!(m.summary.contains_key("g2_pulsewise"));
    }
}

#[test]
fn distribution_rows() {
    let dir = tempfile::tempdir().unwrap();
    let path = out_path(&dir, "d.csv");
    run_ok(&["distribution", "--gammaT", "0.001,1", "--out", path.to_str().unwrap()]);
    let rows = read_csv(&path);
    assert_eq!(rows.len(), 4);
    for r in &rows {
        let mass: f64 = ["P0", "P1", "P2", "P3"].iter().map(|c| field(r, c)).sum();
        assert!((1.0 - 1e-2..=1.0 + 1e-9).contains(&mass), "{r:?}");
    }
    let m = RunManifest::read(&path.with_extension("manifest.json")).unwrap();
    assert!(m.rows.iter().all(|r| !r.flags.iter().any(|f| f == "normalization_deficit")));
    let find = |gt: f64, b: &str| rows.iter().find(|r| field(r, "gammaT") == gt && r["backend"] == b).unwrap();
    let short = find(0.001, "analytic");
    assert!((field(short, "P2") / field(short, "P1") / 3.0 - 1.0).abs() < 0.02);
    assert!((field(find(1.0, "exact"), "pi2") - 0.71).abs() <= 0.02);
}

#[test]
fn tabulated_square_matches_builtin() {
    let dir = tempfile::tempdir().unwrap();
    // A flat envelope sampled in seconds: 2 ns long, gamma = 1e9 / s.
    let env = dir.path().join("env.csv");
    let samples: String = (0..=20).map(|i| format!("{:e},{:e}\n", i as f64 * 1e-10, 3e9)).collect();
    std::fs::write(&env, format!("t,omega\n{samples}")).unwrap();
    let pulse = format!("tabulated:{}", env.display());

    let tab = out_path(&dir, "tab.csv");
    let sq = out_path(&dir, "sq.csv");
    let base = ["distribution", "--gammaT", "0.5", "--area", "2", "--backend", "exact"];
    let mut args: Vec<&str> = base.to_vec();
    args.extend(["--pulse", &pulse, "--time-unit", "seconds", "--gamma", "1e9", "--out", tab.to_str().unwrap()]);
    run_ok(&args);
    let mut args: Vec<&str> = base.to_vec();
    args.extend(["--out", sq.to_str().unwrap()]);
    run_ok(&args);
    let (t, s) = (&read_csv(&tab)[0], &read_csv(&sq)[0]);
    for c in ["P0", "P1", "P2", "P3"] {
        assert!((field(t, c) - field(s, c)).abs() < 1e-9, "{c}: {} vs {}", t[c], s[c]);
    }

    let mut args: Vec<&str> = base.to_vec();
    args.extend(["--pulse", &pulse, "--time-unit", "seconds", "--out", tab.to_str().unwrap()]);
    assert_eq!(rabi(&args).status.code(), Some(2), "seconds without --gamma is a usage error");
}
