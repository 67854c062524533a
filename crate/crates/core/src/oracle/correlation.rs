use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use super::master::MasterSolution;
use super::state::DensityMatrix2;
use super::OracleConfig;
use crate::analytic::SystemParams;
use crate::pulse::PulseShape;
use crate::{Error, Result};

/// `G2(t1, t2)` on a grid, in units of `1/time^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoTimeCorrelation {
    /// Row times.
    pub t1_grid: Vec<f64>,
    /// Column times.
    pub t2_grid: Vec<f64>,
    /// `values[i][j] = G2(t1_grid[i], t2_grid[j])`.
    pub values: Vec<Vec<f64>>,
    /// Emission rate `gamma * rho_ee(t)` on `t1_grid`.
    pub intensities: Vec<f64>,
}

impl TwoTimeCorrelation {
    /// Largest entry.
    pub fn max_value(&self) -> f64 {
        self.values.iter().flatten().copied().fold(0.0, f64::max)
    }

    /// Pulse-wise `g2[0] = int int G2 / (int gamma rho_ee)^2` by the
    /// trapezoid rule. Needs identical row and column grids that cover the
    /// emission.
    pub fn pulsewise_g2(&self) -> Result<f64> {
        if self.t1_grid != self.t2_grid {
            return Err(Error::InvalidArgument("pulse-wise g2 needs identical grids".into()));
        }
        let w = trapezoid_weights(&self.t1_grid);
        let mut num = 0.0;
        for (i, row) in self.values.iter().enumerate() {
            num += w[i] * row.iter().zip(&w).map(|(v, wj)| v * wj).sum::<f64>();
        }
        let den: f64 = self.intensities.iter().zip(&w).map(|(v, wi)| v * wi).sum();
        if !(den > 0.0) {
            return Err(Error::Undefined("g2[0] needs a non-zero emission"));
        }
        Ok(num / (den * den))
    }

    /// Fraction of the integrated `G2` with `min(t1, t2) <= t_split`.
    pub fn weight_fraction_before(&self, t_split: f64) -> Result<f64> {
        if self.t1_grid != self.t2_grid {
            return Err(Error::InvalidArgument("weight fractions need identical grids".into()));
        }
        let w = trapezoid_weights(&self.t1_grid);
        let (mut inside, mut total) = (0.0, 0.0);
        for (i, row) in self.values.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                let x = w[i] * w[j] * v;
                total += x;
                if self.t1_grid[i].min(self.t2_grid[j]) <= t_split {
                    inside += x;
                }
            }
        }
        if !(total > 0.0) {
            return Err(Error::Undefined("G2 vanishes on the grid"));
        }
        Ok(inside / total)
    }
}

fn trapezoid_weights(grid: &[f64]) -> Vec<f64> {
    let n = grid.len();
    let mut w = alloc::vec![0.0; n];
    for i in 1..n {
        let h = 0.5 * (grid[i] - grid[i - 1]);
        w[i - 1] += h;
        w[i] += h;
    }
    w
}

/// Grid of `n_pulse` points across the pulse followed by `n_tail` points up
/// to `t_max`, sharing the pulse end.
pub fn two_time_grid(pulse: &PulseShape, n_pulse: usize, n_tail: usize, t_max: f64) -> Result<Vec<f64>> {
    let t_end = pulse.support_end();
    if n_pulse < 2 || n_tail < 2 || !(t_max > t_end) {
        return Err(Error::InvalidArgument("grid needs >= 2 points per part and t_max beyond the pulse".into()));
    }
    let mut g: Vec<f64> = (0..n_pulse).map(|i| t_end * i as f64 / (n_pulse - 1) as f64).collect();
    g.extend((1..n_tail).map(|i| t_end + (t_max - t_end) * i as f64 / (n_tail - 1) as f64));
    Ok(g)
}

/// `G2(t1, t2) = gamma^2 <sigma+(t1) sigma+(t2) sigma(t2) sigma(t1)>` by
/// the quantum regression theorem: evolve `rho` to `s = min(t1, t2)`,
/// collapse to `|g>` with weight `rho_ee(s)` and read `gamma^2 rho'_ee` at
/// the later time.
///
/// Each value depends only on the ordered pair, so the matrix is symmetric
/// exactly and vanishes on the diagonal.
pub fn g2_two_time(
    pulse: &PulseShape,
    sys: SystemParams,
    t1_grid: &[f64],
    t2_grid: &[f64],
    cfg: &OracleConfig,
) -> Result<TwoTimeCorrelation> {
    for grid in [t1_grid, t2_grid] {
        if grid.is_empty() || grid.windows(2).any(|w| !(w[1] >= w[0])) || !(grid[0] >= 0.0) {
            return Err(Error::InvalidArgument("grids must be non-empty, non-negative and sorted".into()));
        }
    }
    let g = sys.gamma;
    let base = MasterSolution::new(pulse, sys, DensityMatrix2::ground(), 0.0, &cfg.ode)?;
    let mut restarted: BTreeMap<u64, MasterSolution> = BTreeMap::new();
    for &s in t1_grid.iter().chain(t2_grid) {
        if let alloc::collections::btree_map::Entry::Vacant(slot) = restarted.entry(s.to_bits()) {
            slot.insert(MasterSolution::new(pulse, sys, DensityMatrix2::ground(), s, &cfg.ode)?);
        }
    }
    let values = t1_grid
        .iter()
        .map(|&a| {
            t2_grid
                .iter()
                .map(|&b| {
                    let (s, t) = if a <= b { (a, b) } else { (b, a) };
                    g * g * base.excited(s) * restarted[&s.to_bits()].excited(t)
                })
                .collect()
        })
        .collect();
    let intensities = t1_grid.iter().map(|&t| g * base.excited(t)).collect();
    Ok(TwoTimeCorrelation { t1_grid: t1_grid.to_vec(), t2_grid: t2_grid.to_vec(), values, intensities })
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    #[test]
    fn symmetric_with_empty_diagonal() {
        let p = PulseShape::square(PI, 1.0).unwrap();
        let grid = two_time_grid(&p, 12, 20, 8.0).unwrap();
        let c = g2_two_time(&p, SystemParams::default(), &grid, &grid, &OracleConfig::default()).unwrap();
        for i in 0..grid.len() {
            assert_eq!(c.values[i][i], 0.0);
            for j in 0..grid.len() {
                assert_eq!(c.values[i][j], c.values[j][i]);
            }
        }
        assert!(c.max_value() > 0.0);
        assert!(c.pulsewise_g2().unwrap() > 0.0);
    }

    #[test]
    fn trapezoid_weights_sum_to_span() {
        let w = trapezoid_weights(&[0.0, 0.5, 2.0]);
        assert_eq!(w, alloc::vec![0.25, 1.0, 0.75]);
    }
}
