use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by inherent methods whenever std is linked
use num_traits::Float;

use super::state::DensityMatrix2;
use super::OracleConfig;
use crate::analytic::SystemParams;
use crate::counting::{PhotocountDistribution, Provenance};
use crate::numerics::{integrate_ode, panel_points, OdeConfig, OdeSolution};
use crate::pulse::PulseShape;
use crate::{Error, Result};

// Lindblad equation in components [rho_gg, rho_ee, Re rho_ge, Im rho_ge].
// `refill` adds the jump term gamma * rho_ee |g><g|; without it this is
// the no-jump part used by the photon-number-resolved blocks.
#[inline]
fn lindblad(omega: f64, gamma: f64, y: &[f64], refill: bool) -> [f64; 4] {
    let w = 0.5 * omega;
    let (a, b, cr) = (y[0], y[1], y[2]);
    let ci = if y.len() > 3 { y[3] } else { 0.0 };
    let jump = if refill { gamma * b } else { 0.0 };
    [2.0 * w * cr + jump, -2.0 * w * cr - gamma * b, w * (b - a) - 0.5 * gamma * cr, -0.5 * gamma * ci]
}

/// Dense master-equation evolution from a start time onwards; closed-form
/// free decay after the pulse.
#[derive(Debug, Clone)]
pub struct MasterSolution {
    start: f64,
    pulse_end: f64,
    gamma: f64,
    segments: Vec<OdeSolution<4>>,
    at_pulse_end: [f64; 4],
}

impl MasterSolution {
    /// Evolve `rho0` from `start`.
    pub fn new(pulse: &PulseShape, sys: SystemParams, rho0: DensityMatrix2, start: f64, cfg: &OdeConfig) -> Result<Self> {
        if !(start >= 0.0 && start.is_finite()) {
            return Err(Error::InvalidArgument(alloc::format!("start time must be finite and >= 0, got {start}")));
        }
        let pulse_end = pulse.support_end();
        let gamma = sys.gamma;
        let mut y = rho0.to_real();
        let mut segments = Vec::new();
        if start < pulse_end {
            for w in panel_points(start, pulse_end, pulse.breakpoints()).windows(2) {
                let sol = integrate_ode(|t, y| lindblad(pulse.envelope(t), gamma, y, true), y, w[0], w[1], cfg)?;
                y = sol.final_state();
                segments.push(sol);
            }
        }
        Ok(Self { start, pulse_end: pulse_end.max(start), gamma, segments, at_pulse_end: y })
    }

    /// `rho(t)` for `t >= start`.
    pub fn rho(&self, t: f64) -> DensityMatrix2 {
        if t >= self.pulse_end {
            let [a, b, cr, ci] = self.at_pulse_end;
            let d = (-self.gamma * (t - self.pulse_end)).exp();
            let h = (-0.5 * self.gamma * (t - self.pulse_end)).exp();
            return DensityMatrix2::from_real(&[a + b * (1.0 - d), b * d, cr * h, ci * h]);
        }
        let t = t.max(self.start);
        let idx = self.segments.partition_point(|s| s.t_end() < t).min(self.segments.len() - 1);
        DensityMatrix2::from_real(&self.segments[idx].at(t))
    }

    /// Excited population at `t`.
    pub fn excited(&self, t: f64) -> f64 {
        self.rho(t).ee
    }
}

/// `rho(t)` for an emitter starting in `|g>` at `t = 0`.
pub fn master_equation_rho(pulse: &PulseShape, sys: SystemParams, t: f64, cfg: &OracleConfig) -> Result<DensityMatrix2> {
    if !(t >= 0.0) {
        return Err(Error::InvalidArgument(alloc::format!("time must be >= 0, got {t}")));
    }
    Ok(MasterSolution::new(pulse, sys, DensityMatrix2::ground(), 0.0, &cfg.ode)?.rho(t))
}

const RESOLVED: usize = 8;
const BLOCK: usize = 3;
const RESOLVED_DIM: usize = BLOCK * (RESOLVED + 1);

/// Photocount distribution from the photon-number-resolved master
/// equation, `1 <= n_max <= 7`.
///
/// Blocks `rho_0..rho_7` hold the state conditioned on that many emissions
/// and a last block absorbs everything beyond. Each block evolves without
/// refill and is fed by `gamma * rho_ee` of the block below. After the
/// pulse the excited part of block `k` adds exactly one photon.
pub fn number_resolved_distribution(
    pulse: &PulseShape,
    sys: SystemParams,
    n_max: usize,
    cfg: &OracleConfig,
) -> Result<PhotocountDistribution> {
    if !(1..RESOLVED).contains(&n_max) {
        return Err(Error::InvalidArgument(alloc::format!("n_max must be in 1..{RESOLVED}, got {n_max}")));
    }
    let gamma = sys.gamma;
    let mut y = [0.0; RESOLVED_DIM];
    y[0] = 1.0;
    for w in panel_points(0.0, pulse.support_end(), pulse.breakpoints()).windows(2) {
        let sol = integrate_ode(
            |t, y: &[f64; RESOLVED_DIM]| {
                let omega = pulse.envelope(t);
                let mut dy = [0.0; RESOLVED_DIM];
                for k in 0..=RESOLVED {
                    let blk = &y[BLOCK * k..BLOCK * (k + 1)];
                    let d = lindblad(omega, gamma, blk, k == RESOLVED);
                    dy[BLOCK * k..BLOCK * (k + 1)].copy_from_slice(&d[..BLOCK]);
                    if k > 0 {
                        dy[BLOCK * k] += gamma * y[BLOCK * (k - 1) + 1];
                    }
                }
                dy
            },
            y,
            w[0],
            w[1],
            &cfg.ode,
        )?;
        y = sol.final_state();
    }
    let ground = |k: usize| y[BLOCK * k];
    let excited = |k: usize| y[BLOCK * k + 1];
    let mut p = Vec::with_capacity(RESOLVED + 1);
    for k in 0..RESOLVED {
        p.push(ground(k) + if k > 0 { excited(k - 1) } else { 0.0 });
    }
    let beyond = ground(RESOLVED) + excited(RESOLVED) + excited(RESOLVED - 1);
    let bound = p[n_max + 1..].iter().sum::<f64>() + beyond;
    p.truncate(n_max + 1);
    PhotocountDistribution::from_exclusive(p, bound.max(0.0), cfg.ode.rel_tol, Provenance::NumberResolved)
}

/// Factorial moments of the photon number of one pulse, without
/// truncation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhotonMoments {
    /// `E[n]`.
    pub mean: f64,
    /// `E[n(n-1)]`.
    pub second_factorial: f64,
}

impl PhotonMoments {
    /// `E[n(n-1)] / E[n]^2`.
    pub fn g2_zero(&self) -> Result<f64> {
        if !(self.mean > 0.0) {
            return Err(Error::Undefined("g2[0] needs E[n] > 0"));
        }
        Ok(self.second_factorial / (self.mean * self.mean))
    }
}

/// First two factorial moments of the photon number from the
/// counting-weighted density matrices `sum_k k rho_k` and
/// `sum_k k(k-1) rho_k`, which obey closed equations driven by the jump
/// term of the next lower moment.
pub fn photon_moments(pulse: &PulseShape, sys: SystemParams, cfg: &OracleConfig) -> Result<PhotonMoments> {
    let gamma = sys.gamma;
    let mut y = [0.0; 3 * BLOCK];
    y[0] = 1.0;
    for w in panel_points(0.0, pulse.support_end(), pulse.breakpoints()).windows(2) {
        let sol = integrate_ode(
            |t, y: &[f64; 3 * BLOCK]| {
                let omega = pulse.envelope(t);
                let mut dy = [0.0; 3 * BLOCK];
                for m in 0..3 {
                    let d = lindblad(omega, gamma, &y[BLOCK * m..BLOCK * (m + 1)], true);
                    dy[BLOCK * m..BLOCK * (m + 1)].copy_from_slice(&d[..BLOCK]);
                    if m > 0 {
                        dy[BLOCK * m] += m as f64 * gamma * y[BLOCK * (m - 1) + 1];
                    }
                }
                dy
            },
            y,
            w[0],
            w[1],
            &cfg.ode,
        )?;
        y = sol.final_state();
    }
    let trace = |m: usize| y[BLOCK * m] + y[BLOCK * m + 1];
    Ok(PhotonMoments { mean: trace(1) + y[1], second_factorial: trace(2) + 2.0 * y[BLOCK + 1] })
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    #[test]
    fn lossless_inversion_and_free_decay() {
        let cfg = OracleConfig::default();
        let p = PulseShape::square(PI, 1.0).unwrap();
        let rho = master_equation_rho(&p, SystemParams::lossless(), 2.0, &cfg).unwrap();
        assert!((rho.ee - 1.0).abs() < 1e-10);

        let off = PulseShape::square(0.0, 1.0).unwrap();
        let sol = MasterSolution::new(&off, SystemParams::default(), DensityMatrix2::excited(), 0.0, &cfg.ode).unwrap();
        for &t in &[0.3, 1.0, 4.0] {
            assert!((sol.excited(t) - (-t).exp()).abs() < 1e-12);
        }
    }

    #[test]
    fn moments_match_resolved_distribution() {
        let cfg = OracleConfig::default();
        let p = PulseShape::square(2.0 * PI, 1.0).unwrap();
        let sys = SystemParams::default();
        let d = number_resolved_distribution(&p, sys, 7, &cfg).unwrap();
        let m = photon_moments(&p, sys, &cfg).unwrap();
        let mean: f64 = d.exclusive().iter().enumerate().map(|(k, p)| k as f64 * p).sum();
        let fact: f64 = d.exclusive().iter().enumerate().map(|(k, p)| (k * k.saturating_sub(1)) as f64 * p).sum();
        assert!(d.truncation_bound() < 1e-6);
        assert!((mean - m.mean).abs() < 1e-6);
        assert!((fact - m.second_factorial).abs() < 1e-5);
        assert!((d.resolved_mass() + d.truncation_bound() - 1.0).abs() < 1e-9);
    }
}
