use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by inherent methods whenever std is linked
use num_traits::Float;

use super::state::TwoLevelState;
use super::OracleConfig;
use crate::analytic::SystemParams;
use crate::numerics::{integrate_ode, panel_points, OdeConfig, OdeSolution};
use crate::pulse::PulseShape;
use crate::{Error, Result};

/// Right-hand side of the no-jump equation for real and imaginary parts
/// `[g_re, g_im, e_re, e_im]`:
/// `g' = (Omega/2) e`, `e' = -(Omega/2) g - (gamma/2) e`.
#[inline]
pub(crate) fn no_jump_rhs(omega: f64, gamma: f64, y: &[f64; 4]) -> [f64; 4] {
    let w = 0.5 * omega;
    let k = 0.5 * gamma;
    [w * y[2], w * y[3], -w * y[0] - k * y[2], -w * y[1] - k * y[3]]
}

/// Dense no-jump evolution of one state from a start time onwards.
///
/// Inside the pulse the evolution is integrated segment by segment between
/// the pulse breakpoints; afterwards the excited amplitude decays in closed
/// form.
#[derive(Debug, Clone)]
pub struct NoJumpPath {
    start: f64,
    pulse_end: f64,
    gamma: f64,
    segments: Vec<OdeSolution<4>>,
    at_pulse_end: [f64; 4],
}

impl NoJumpPath {
    /// Evolve `state` from `start`.
    pub fn new(pulse: &PulseShape, sys: SystemParams, state: TwoLevelState, start: f64, cfg: &OdeConfig) -> Result<Self> {
        if !(start >= 0.0 && start.is_finite()) {
            return Err(Error::InvalidArgument(alloc::format!("start time must be finite and >= 0, got {start}")));
        }
        let pulse_end = pulse.support_end();
        let gamma = sys.gamma;
        let mut y = state.to_real();
        let mut segments = Vec::new();
        if start < pulse_end {
            let pts = panel_points(start, pulse_end, pulse.breakpoints());
            for w in pts.windows(2) {
                let sol = integrate_ode(|t, y| no_jump_rhs(pulse.envelope(t), gamma, y), y, w[0], w[1], cfg)?;
                y = sol.final_state();
                segments.push(sol);
            }
        }
        Ok(Self { start, pulse_end: pulse_end.max(start), gamma, segments, at_pulse_end: y })
    }

    /// Start time.
    pub fn start(&self) -> f64 {
        self.start
    }

    /// Time after which the evolution is pure decay.
    pub fn pulse_end(&self) -> f64 {
        self.pulse_end
    }

    pub(crate) fn raw(&self, t: f64) -> [f64; 4] {
        if t >= self.pulse_end {
            let f = (-0.5 * self.gamma * (t - self.pulse_end)).exp();
            let y = self.at_pulse_end;
            return [y[0], y[1], f * y[2], f * y[3]];
        }
        let t = t.max(self.start);
        let idx = self.segments.partition_point(|s| s.t_end() < t).min(self.segments.len() - 1);
        self.segments[idx].at(t)
    }

    /// Unnormalized state at `t >= start`.
    pub fn state(&self, t: f64) -> TwoLevelState {
        TwoLevelState::from_real(&self.raw(t))
    }

    /// Squared norm at `t`: probability of no emission on `[start, t]`
    /// times the initial squared norm.
    pub fn norm_sqr(&self, t: f64) -> f64 {
        let y = self.raw(t);
        y.iter().map(|v| v * v).sum()
    }

    /// Squared excited amplitude at `t`; times `gamma` this is the density
    /// of the next emission.
    pub fn excited_sqr(&self, t: f64) -> f64 {
        let y = self.raw(t);
        y[2] * y[2] + y[3] * y[3]
    }

    /// State at the end of the pulse.
    pub fn at_pulse_end(&self) -> TwoLevelState {
        TwoLevelState::from_real(&self.at_pulse_end)
    }

    /// Ends of the accepted ODE steps inside the pulse, increasing.
    pub fn step_ends(&self) -> impl Iterator<Item = f64> + '_ {
        self.segments.iter().flat_map(|s| s.step_ends())
    }
}

/// No-jump evolution of `state` from `t_a` to `t_b`. The squared norm of
/// the result divided by that of `state` is the probability of no emission
/// in between.
pub fn propagate_conditional(
    pulse: &PulseShape,
    sys: SystemParams,
    state: TwoLevelState,
    t_a: f64,
    t_b: f64,
    cfg: &OracleConfig,
) -> Result<TwoLevelState> {
    if !(t_b >= t_a) {
        return Err(Error::InvalidArgument(alloc::format!("need t_a <= t_b, got {t_a} > {t_b}")));
    }
    Ok(NoJumpPath::new(pulse, sys, state, t_a, &cfg.ode)?.state(t_b))
}
