use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by inherent methods whenever std is linked
use num_traits::Float;

use super::conditional::NoJumpPath;
use super::state::TwoLevelState;
use super::OracleConfig;
use crate::analytic::SystemParams;
use crate::counting::{PhotocountDistribution, Provenance};
use crate::numerics::{integrate_breakpoints, integrate_ode, panel_points, Estimate, OdeConfig, OdeSolution, QuadratureConfig};
use crate::pulse::PulseShape;
use crate::{Error, Result};

/// Exact inclusive density `f_n(t_1, ..., t_n)`: the emitter starts in
/// `|g>` at `t = 0`, evolves without emission up to each `t_k`, emits with
/// density `gamma |e(t_k)|^2` and restarts from `|g>`. Survival between
/// emissions is contained in the unnormalized amplitudes.
pub fn exact_density_fn(pulse: &PulseShape, sys: SystemParams, times: &[f64], cfg: &OracleConfig) -> Result<f64> {
    if times.is_empty() || times.len() > 4 {
        return Err(Error::InvalidArgument(alloc::format!("need 1..=4 emission times, got {}", times.len())));
    }
    if !(times[0] >= 0.0) || times.windows(2).any(|w| !(w[1] > w[0])) || !times[times.len() - 1].is_finite() {
        return Err(Error::InvalidArgument("emission times must be finite, >= 0 and strictly increasing".into()));
    }
    let mut prev = 0.0;
    let mut density = 1.0;
    for &t in times {
        let path = NoJumpPath::new(pulse, sys, TwoLevelState::ground(), prev, &cfg.ode)?;
        density *= sys.gamma * path.excited_sqr(t);
        if density == 0.0 {
            break;
        }
        prev = t;
    }
    Ok(density)
}

/// No-emission survival `exp(-lambda)` on `[t_a, t_b]` from `|g>` at `t_a`
/// with `lambda = int gamma sin^2((A(t) - A(t_a)) / 2) dt`, i.e. with the
/// ideal Rabi population as the emission rate. Only a comparison value; the
/// exact survival is the squared norm of [`NoJumpPath`].
pub fn lambda_survival(pulse: &PulseShape, sys: SystemParams, t_a: f64, t_b: f64, cfg: &QuadratureConfig) -> Result<f64> {
    if !(t_b >= t_a && t_a >= 0.0) {
        return Err(Error::InvalidArgument("need 0 <= t_a <= t_b".into()));
    }
    let a0 = pulse.cumulative_area(t_a);
    let lam = integrate_breakpoints(
        |t| {
            let s = (0.5 * (pulse.cumulative_area(t) - a0)).sin();
            sys.gamma * s * s
        },
        &panel_points(t_a, t_b, pulse.breakpoints()),
        cfg,
    )?;
    Ok((-lam.value).exp())
}

/// `Q(s)`: probability of at least one more emission for an emitter
/// restarted in `|g>` at time `s`.
///
/// All of `Q` comes from one backward solve of the adjoint equation
/// `dw/ds = -w G(s)` with `w(T) = <g|`, since the ground amplitude left
/// after the pulse is `w(s) |g>` and everything excited eventually decays.
#[derive(Debug, Clone)]
pub struct RepumpProbability {
    pulse_end: f64,
    lossless: bool,
    segments: Vec<OdeSolution<2>>,
}

impl RepumpProbability {
    /// Solve the adjoint equation over the pulse.
    pub fn new(pulse: &PulseShape, sys: SystemParams, cfg: &OdeConfig) -> Result<Self> {
        let pulse_end = pulse.support_end();
        let gamma = sys.gamma;
        let pts = panel_points(0.0, pulse_end, pulse.breakpoints());
        let mut w = [1.0, 0.0];
        let mut segments = Vec::with_capacity(pts.len());
        for win in pts.windows(2).rev() {
            let sol = integrate_ode(
                |t, w: &[f64; 2]| {
                    let h = 0.5 * pulse.envelope(t);
                    [w[1] * h, -w[0] * h + 0.5 * gamma * w[1]]
                },
                w,
                win[1],
                win[0],
                cfg,
            )?;
            w = sol.final_state();
            segments.push(sol);
        }
        segments.reverse();
        Ok(Self { pulse_end, lossless: gamma == 0.0, segments })
    }

    /// `Q(s)`.
    pub fn at(&self, s: f64) -> f64 {
        if self.lossless || s >= self.pulse_end || self.segments.is_empty() {
            return 0.0;
        }
        let s = s.max(0.0);
        let idx = self.segments.partition_point(|seg| seg.t_start() < s).min(self.segments.len() - 1);
        let wg = self.segments[idx].at(s)[0];
        (1.0 - wg * wg).max(0.0)
    }
}

struct Hierarchy<'a> {
    pulse: &'a PulseShape,
    sys: SystemParams,
    cfg: &'a OracleConfig,
    repump: RepumpProbability,
    from_zero: NoJumpPath,
}

impl Hierarchy<'_> {
    // G_1(s) = Q(s); G_m(s) = int_s^T gamma |e(t; s)|^2 G_{m-1}(t) dt, so
    // that F_n = G_n(0).
    fn level(&self, m: usize, s: f64, quad: &QuadratureConfig) -> Result<Estimate> {
        if m == 1 {
            return Ok(Estimate::exact(self.repump.at(s)));
        }
        let t_end = self.pulse.support_end();
        if s >= t_end {
            return Ok(Estimate::exact(0.0));
        }
        let owned;
        let path = if s == 0.0 {
            &self.from_zero
        } else {
            owned = NoJumpPath::new(self.pulse, self.sys, TwoLevelState::ground(), s, &self.cfg.ode)?;
            &owned
        };
        let inner = quad.tightened(10.0);
        let mut failure = None;
        let mut inner_err = 0.0f64;
        let est = integrate_breakpoints(
            |t| {
                let rate = self.sys.gamma * path.excited_sqr(t);
                match self.level(m - 1, t, &inner) {
                    Ok(e) => {
                        inner_err = inner_err.max(e.error);
                        rate * e.value
                    }
                    Err(e) => {
                        failure.get_or_insert(e);
                        0.0
                    }
                }
            },
            &panel_points(s, t_end, self.pulse.breakpoints()),
            quad,
        )?;
        if let Some(e) = failure {
            return Err(e);
        }
        Ok(Estimate { value: est.value, error: est.error + inner_err })
    }
}

/// Exact photocount distribution `P_0..=P_{n_max}`, `1 <= n_max <= 3`,
/// with `F_{n_max+1}` as the truncation bound.
///
/// `F_n` is the ordered-time integral of [`exact_density_fn`]; the
/// integral over the last emission time is taken in closed form through
/// [`RepumpProbability`], which covers the whole post-pulse decay.
pub fn exact_distribution(pulse: &PulseShape, sys: SystemParams, n_max: usize, cfg: &OracleConfig) -> Result<PhotocountDistribution> {
    if !(1..=3).contains(&n_max) {
        return Err(Error::InvalidArgument(alloc::format!("n_max must be in 1..=3, got {n_max}")));
    }
    let h = Hierarchy {
        pulse,
        sys,
        cfg,
        repump: RepumpProbability::new(pulse, sys, &cfg.ode)?,
        from_zero: NoJumpPath::new(pulse, sys, TwoLevelState::ground(), 0.0, &cfg.ode)?,
    };
    let mut fs = Vec::with_capacity(n_max + 1);
    let mut err = 0.0f64;
    for n in 1..=n_max + 1 {
        let e = h.level(n, 0.0, &cfg.quadrature)?;
        err = err.max(e.error);
        fs.push(e.value);
    }
    PhotocountDistribution::from_inclusive(&fs, err, Provenance::ExactOracle)
}
