//! Short-pulse photon-counting hierarchy.
//!
//! During the pulse an emission resets the emitter to the ground state and
//! the ideal Rabi rotation restarts from the area absorbed so far, so the
//! `k`-th emission of a sequence contributes `gamma * sin^2(dA / 2)` with
//! `dA` the area absorbed since the previous emission. Survival during the
//! pulse is approximated by `exp(-gamma t / 2)` and after the pulse the
//! emitter only decays.
//!
//! "Pulse end" `T` below is [`PulseShape::support_end`], the time after
//! which no area is left.

use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by inherent methods whenever std is linked
use num_traits::Float;

use crate::counting::{Axis, DensitySample, PhotocountDistribution, Provenance};
use crate::numerics::{integrate_breakpoints, integrate_simplex, panel_points, Estimate, QuadratureConfig};
use crate::pulse::PulseShape;
use crate::{Error, Result};

/// Emitter parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    /// Spontaneous decay rate `gamma = 1 / tau_e`.
    pub gamma: f64,
}

impl SystemParams {
    /// Emitter with decay rate `gamma > 0`.
    pub fn new(gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::InvalidArgument(alloc::format!("decay rate must be > 0, got {gamma}")));
        }
        Ok(Self { gamma })
    }

    /// Emitter that never decays; only meaningful for coherent-evolution
    /// checks.
    pub fn lossless() -> Self {
        Self { gamma: 0.0 }
    }
}

impl Default for SystemParams {
    fn default() -> Self {
        Self { gamma: 1.0 }
    }
}

#[inline]
fn sin2h(x: f64) -> f64 {
    let s = (0.5 * x).sin();
    s * s
}

/// Ideal Rabi excitation `sin^2(a / 2)` after absorbing area `a`.
pub fn ideal_excited_prob(area: f64) -> f64 {
    sin2h(area)
}

/// Long-pulse limit of the inclusive probabilities,
/// `(gT/2)^(n-1) / (n-1)! * exp(-gT/2)`.
pub fn poisson_limit_fn(gamma_t: f64, n: usize) -> Result<f64> {
    if n == 0 || !(gamma_t >= 0.0) {
        return Err(Error::InvalidArgument("need n >= 1 and gammaT >= 0".into()));
    }
    let mean = 0.5 * gamma_t;
    let mut term = (-mean).exp();
    for k in 1..n {
        term *= mean / k as f64;
    }
    Ok(term)
}

/// Closed-form short-pulse probabilities for a square pulse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SquareClosedForm {
    /// `F_1`.
    pub f1: f64,
    /// `F_2`.
    pub f2: f64,
    /// `F_3`.
    pub f3: f64,
    /// `P_1 = F_1 - F_2`.
    pub p1: f64,
    /// `P_2 = F_2 - F_3`.
    pub p2: f64,
}

impl SquareClosedForm {
    /// Distribution `P_0..P_2` with `F_3` as the truncation bound.
    pub fn distribution(&self) -> Result<PhotocountDistribution> {
        PhotocountDistribution::from_inclusive(&[self.f1, self.f2, self.f3], 0.0, Provenance::ClosedFormSquare)
    }
}

// Taylor coefficients (in a^2) of 1 - sin(a)/a, 2 + cos(a) - 3 sin(a)/a and
// [4(a^2-6) - (a^2-24) cos(a) + 9 a sin(a)] / a^2; each starts at the
// power noted by its offset.
const S1: [f64; 10] = [
    1.0 / 6.0,
    -1.0 / 120.0,
    1.0 / 5040.0,
    -1.0 / 362880.0,
    1.0 / 39916800.0,
    -1.0 / 6227020800.0,
    1.0 / 1307674368000.0,
    -1.0 / 355687428096000.0,
    1.0 / 121645100408832000.0,
    -1.0 / 51090942171709440000.0,
];
const S2: [f64; 9] = [
    1.0 / 60.0,
    -1.0 / 1260.0,
    1.0 / 60480.0,
    -1.0 / 4989600.0,
    1.0 / 622702080.0,
    -1.0 / 108972864000.0,
    1.0 / 25406244864000.0,
    -1.0 / 7602818775552000.0,
    1.0 / 2838385676206080000.0,
];
const G3: [f64; 8] = [
    1.0 / 5040.0,
    -1.0 / 151200.0,
    1.0 / 9979200.0,
    -1.0 / 1089728640.0,
    1.0 / 174356582400.0,
    -1.0 / 38109367296000.0,
    1.0 / 10861169679360000.0,
    -1.0 / 3902780304783360000.0,
];

fn series(coeffs: &[f64], a2: f64, leading_power: i32) -> f64 {
    let mut acc = 0.0;
    for c in coeffs.iter().rev() {
        acc = acc * a2 + c;
    }
    acc * a2.powi(leading_power)
}

const SERIES_BELOW: f64 = 1.0;

/// Closed-form short-pulse `F_1, F_2, F_3` (and `P_1, P_2`) for a square
/// pulse of total area `area` and `gamma * T = gamma_t`.
///
/// Small areas use Taylor expansions to avoid cancellation; `area` must be
/// strictly positive.
pub fn closed_form_square(area: f64, gamma_t: f64) -> Result<SquareClosedForm> {
    if !(area > 0.0 && area.is_finite()) {
        return Err(Error::InvalidArgument(alloc::format!("closed forms need area > 0, got {area}")));
    }
    if !(gamma_t >= 0.0 && gamma_t.is_finite()) {
        return Err(Error::InvalidArgument(alloc::format!("gammaT must be >= 0, got {gamma_t}")));
    }
    let a2 = area * area;
    let (one_minus_sinc, f2_shape, f3_shape) = if area < SERIES_BELOW {
        (series(&S1, a2, 1), series(&S2, a2, 2), series(&G3, a2, 3))
    } else {
        let (s, c) = (area.sin(), area.cos());
        (
            1.0 - s / area,
            2.0 + c - 3.0 * s / area,
            (4.0 * (a2 - 6.0) - (a2 - 24.0) * c + 9.0 * area * s) / a2,
        )
    };
    let decay = (-0.5 * gamma_t).exp();
    let f1 = decay * (sin2h(area) + 0.5 * gamma_t * one_minus_sinc);
    let f2 = decay * gamma_t / 8.0 * f2_shape;
    let f3 = decay * gamma_t * gamma_t / 64.0 * f3_shape;
    Ok(SquareClosedForm { f1, f2, f3, p1: f1 - f2, p2: f2 - f3 })
}

/// Short-pulse `g2[0] ~ 2 P_2 / (P_1 + 2 P_2)^2`.
pub fn g2_zero_short_pulse(p1: f64, p2: f64) -> Result<f64> {
    let mean = p1 + 2.0 * p2;
    if !(mean > 0.0) {
        return Err(Error::Undefined("g2[0] needs P1 + 2 P2 > 0"));
    }
    Ok(2.0 * p2 / (mean * mean))
}

/// A marginal density computed by quadrature together with the leading
/// short-pulse closed form it should approach.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarginalDensity {
    /// Quadrature of the defining subtraction.
    pub value: Estimate,
    /// Leading-order short-pulse expression.
    pub short_pulse: f64,
}

/// The short-pulse model bound to a pulse and emitter.
#[derive(Debug, Clone)]
pub struct ShortPulseModel<'a> {
    pulse: &'a PulseShape,
    sys: SystemParams,
    cfg: QuadratureConfig,
}

impl<'a> ShortPulseModel<'a> {
    /// Model with default quadrature tolerances.
    pub fn new(pulse: &'a PulseShape, sys: SystemParams) -> Self {
        Self { pulse, sys, cfg: QuadratureConfig::default() }
    }

    /// Replace the quadrature configuration.
    pub fn with_quadrature(mut self, cfg: QuadratureConfig) -> Self {
        self.cfg = cfg;
        self
    }

    /// The pulse.
    pub fn pulse(&self) -> &PulseShape {
        self.pulse
    }

    fn t_end(&self) -> f64 {
        self.pulse.support_end()
    }

    fn area(&self, t: f64) -> f64 {
        self.pulse.cumulative_area(t)
    }

    fn breaks_in(&self, lo: f64, hi: f64) -> Vec<f64> {
        panel_points(lo, hi, self.pulse.breakpoints())
    }

    /// Product of re-excitation factors `prod sin^2((A(t_k) - A(t_{k-1}))/2)`
    /// with `t_0 = 0`.
    fn excitation_product(&self, times: &[f64]) -> f64 {
        let mut prev = 0.0;
        let mut prod = 1.0;
        for &t in times {
            let a = self.area(t);
            prod *= sin2h(a - prev);
            prev = a;
        }
        prod
    }

    /// Inclusive density `f_n(t_1, ..., t_n)` for strictly increasing times.
    pub fn density_fn(&self, times: &[f64]) -> Result<f64> {
        check_ordered(times)?;
        let g = self.sys.gamma;
        let n = times.len();
        let t_end = self.t_end();
        let last = times[n - 1];
        let decay = if last < t_end {
            (-0.5 * g * last).exp()
        } else if n == 1 || times[n - 2] < t_end {
            (-0.5 * g * t_end).exp() * (-g * (last - t_end)).exp()
        } else {
            return Ok(0.0);
        };
        Ok(g.powi(n as i32) * self.excitation_product(times) * decay)
    }

    /// Inclusive probability `F_n`, `1 <= n <= 4`.
    ///
    /// `F_1` keeps both the in-pulse emission term and the post-pulse decay
    /// of the residual excitation. For `n >= 2` all but the last emission
    /// happen during the pulse and the last one has been integrated out.
    pub fn inclusive_fn(&self, n: usize) -> Result<Estimate> {
        if !(1..=4).contains(&n) {
            return Err(Error::InvalidArgument(alloc::format!("F_n supported for 1 <= n <= 4, got {n}")));
        }
        let g = self.sys.gamma;
        let t_end = self.t_end();
        let a_inf = self.pulse.total_area();
        let prefactor = (-0.5 * g * t_end).exp();
        if n == 1 {
            let window = integrate_breakpoints(|t| sin2h(self.area(t)), &self.breaks_in(0.0, t_end), &self.cfg)?;
            return Ok(Estimate {
                value: prefactor * (g * window.value + sin2h(a_inf)),
                error: prefactor * g * window.error,
            });
        }
        let inner = integrate_simplex(
            |ts| self.excitation_product(ts) * sin2h(a_inf - self.area(ts[ts.len() - 1])),
            n - 1,
            0.0,
            t_end,
            self.pulse.breakpoints(),
            &self.cfg,
        )?;
        Ok(inner.scale(g.powi(n as i32 - 1) * prefactor))
    }

    /// Exclusive distribution `P_0..=P_{n_max}` with `F_{n_max+1}` as the
    /// truncation bound, `1 <= n_max <= 3`.
    pub fn exclusive_pn(&self, n_max: usize) -> Result<PhotocountDistribution> {
        if !(1..=3).contains(&n_max) {
            return Err(Error::InvalidArgument(alloc::format!("n_max must be in 1..=3, got {n_max}")));
        }
        let mut fs = Vec::with_capacity(n_max + 1);
        let mut err = 0.0f64;
        for n in 1..=n_max + 1 {
            let e = self.inclusive_fn(n)?;
            err = err.max(e.error);
            fs.push(e.value);
        }
        PhotocountDistribution::from_inclusive(&fs, err, Provenance::AnalyticShortPulse)
    }

    // int_{t1}^{inf} f_2(t1, t2) dt2, in-pulse part by quadrature and the
    // post-pulse exponential folded in closed form.
    fn f2_tail_from(&self, t1: f64) -> Result<Estimate> {
        let g = self.sys.gamma;
        let t_end = self.t_end();
        if t1 >= t_end {
            return Ok(Estimate::exact(0.0));
        }
        let a1 = self.area(t1);
        let s1 = sin2h(a1);
        let a_inf = self.pulse.total_area();
        let decay = (-0.5 * g * t_end).exp();
        let after = g * sin2h(a_inf - a1) * s1 * decay;
        let during = integrate_breakpoints(
            |t2| g * g * sin2h(self.area(t2) - a1) * s1 * (-0.5 * g * t2).exp(),
            &self.breaks_in(t1, t_end),
            &self.cfg,
        )?;
        Ok(during + Estimate::exact(after))
    }

    // int_{t2}^{inf} f_3(t1, t2, t3) dt3 for t1 < t2.
    fn f3_tail_from(&self, t1: f64, t2: f64, cfg: &QuadratureConfig) -> Result<Estimate> {
        let g = self.sys.gamma;
        let t_end = self.t_end();
        if t2 >= t_end {
            return Ok(Estimate::exact(0.0));
        }
        let a1 = self.area(t1);
        let a2 = self.area(t2);
        let head = sin2h(a2 - a1) * sin2h(a1);
        let a_inf = self.pulse.total_area();
        let decay = (-0.5 * g * t_end).exp();
        let after = g * g * sin2h(a_inf - a2) * head * decay;
        let during = integrate_breakpoints(
            |t3| g * g * g * sin2h(self.area(t3) - a2) * head * (-0.5 * g * t3).exp(),
            &self.breaks_in(t2, t_end),
            cfg,
        )?;
        Ok(during + Estimate::exact(after))
    }

    /// Exclusive single-emission marginal
    /// `p_1(t_1) = f_1(t_1) - int f_2(t_1, t_2) dt_2`.
    pub fn marginal_p1(&self, t1: f64) -> Result<MarginalDensity> {
        check_time(t1)?;
        let g = self.sys.gamma;
        let a1 = self.area(t1);
        let a_inf = self.pulse.total_area();
        let f1 = self.density_fn(&[t1])?;
        let tail = self.f2_tail_from(t1)?;
        let short = g * sin2h(a1) * (0.5 * (a_inf - a1)).cos().powi(2);
        Ok(MarginalDensity { value: Estimate::exact(f1) - tail, short_pulse: short })
    }

    /// Exclusive density for a first emission at `t_1` that starts a
    /// two-photon sequence,
    /// `p_2(t_1) = int dt_2 [f_2(t_1, t_2) - int f_3(t_1, t_2, t_3) dt_3]`.
    pub fn marginal_p2(&self, t1: f64) -> Result<MarginalDensity> {
        check_time(t1)?;
        let t_end = self.t_end();
        let a1 = self.area(t1);
        let short = self.sys.gamma * sin2h(self.pulse.total_area() - a1) * sin2h(a1);
        if t1 >= t_end {
            return Ok(MarginalDensity { value: Estimate::exact(0.0), short_pulse: short });
        }
        let f2 = self.f2_tail_from(t1)?;
        let inner_cfg = self.cfg.tightened(10.0);
        let mut failure = None;
        let three = integrate_breakpoints(
            |t2| match self.f3_tail_from(t1, t2, &inner_cfg) {
                Ok(e) => e.value,
                Err(e) => {
                    failure.get_or_insert(e);
                    0.0
                }
            },
            &self.breaks_in(t1, t_end),
            &self.cfg,
        )?;
        if let Some(e) = failure {
            return Err(e);
        }
        Ok(MarginalDensity { value: f2 - three, short_pulse: short })
    }

    /// Exclusive joint two-emission density
    /// `p_2(t_1, t_2) = f_2(t_1, t_2) - int f_3(t_1, t_2, t_3) dt_3`.
    pub fn density_p2_joint(&self, t1: f64, t2: f64) -> Result<f64> {
        let f2 = self.density_fn(&[t1, t2])?;
        let three = self.f3_tail_from(t1, t2, &self.cfg)?;
        Ok(f2 - three.value)
    }

    /// Ordered three-emission density in the zero-width limit: non-zero
    /// only for `t_1 < t_2 < T <= t_3`, where it equals
    /// `g^3 sin^2((A_inf - A_2)/2) sin^2((A_2 - A_1)/2) sin^2(A_1/2) exp(-g t_3)`.
    pub fn density_p3(&self, t1: f64, t2: f64, t3: f64) -> Result<f64> {
        check_ordered(&[t1, t2, t3])?;
        Ok(self.p3_ordered(t1, t2, t3))
    }

    fn p3_ordered(&self, t1: f64, t2: f64, t3: f64) -> f64 {
        let t_end = self.t_end();
        if !(t2 < t_end && t3 >= t_end && t1 < t2) {
            return 0.0;
        }
        let g = self.sys.gamma;
        let a1 = self.area(t1);
        let a2 = self.area(t2);
        g * g * g * sin2h(self.pulse.total_area() - a2) * sin2h(a2 - a1) * sin2h(a1) * (-g * t3).exp()
    }

    /// Fully symmetrized three-emission density: the average of the ordered
    /// density over all six orderings of the arguments.
    pub fn density_p3_sym(&self, t1: f64, t2: f64, t3: f64) -> f64 {
        let mut ts = [t1, t2, t3];
        ts.sort_by(f64::total_cmp);
        self.p3_ordered(ts[0], ts[1], ts[2]) / 6.0
    }

    /// `p_3S(t_1, t_2) = int_0^inf p_3S(t_1, t_2, t_3) dt_3`.
    pub fn p3_sym_pair(&self, t1: f64, t2: f64) -> Result<Estimate> {
        check_time(t1)?;
        check_time(t2)?;
        let g = self.sys.gamma;
        let t_end = self.t_end();
        let (a, b) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
        let mut total = Estimate::default();
        if b < t_end {
            // Third time after the pulse: closed-form exponential tail.
            let at_end = self.p3_ordered(a, b, t_end);
            total = total + Estimate::exact(at_end / g / 6.0);
        } else if a < t_end {
            // b is the last emission; the free time sits before a or
            // between a and the pulse end.
            let before = integrate_breakpoints(|t| self.p3_ordered(t, a, b), &self.breaks_in(0.0, a), &self.cfg)?;
            let between = integrate_breakpoints(|t| self.p3_ordered(a, t, b), &self.breaks_in(a, t_end), &self.cfg)?;
            total = (before + between).scale(1.0 / 6.0);
        }
        Ok(total)
    }

    /// Symmetrized single-time marginal
    /// `p_3S(t_1) = int_0^inf p_3S(t_1, t_2) dt_2`.
    pub fn p3_sym_marginal(&self, t1: f64) -> Result<Estimate> {
        check_time(t1)?;
        let g = self.sys.gamma;
        let t_end = self.t_end();
        let inner = self.cfg.tightened(10.0);
        let mut failure = None;
        let model = self.clone().with_quadrature(inner);
        let in_pulse = integrate_breakpoints(
            |t2| match model.p3_sym_pair(t1, t2) {
                Ok(e) => e.value,
                Err(e) => {
                    failure.get_or_insert(e);
                    0.0
                }
            },
            &self.breaks_in(0.0, t_end),
            &self.cfg,
        )?;
        if let Some(e) = failure {
            return Err(e);
        }
        let mut total = in_pulse;
        if t1 < t_end {
            // For t2 >= T the pair density decays as exp(-g (t2 - T)).
            let at_end = model.p3_sym_pair(t1, t_end)?;
            total = total + at_end.scale(1.0 / g);
        }
        Ok(total)
    }

    /// Density that `t_1` is the first emission of a three-photon
    /// sequence, `int int p_3(t_1, t_2, t_3) dt_2 dt_3`.
    pub fn p3_first_marginal(&self, t1: f64) -> Result<Estimate> {
        check_time(t1)?;
        let g = self.sys.gamma;
        let t_end = self.t_end();
        if t1 >= t_end {
            return Ok(Estimate::exact(0.0));
        }
        integrate_breakpoints(|t2| self.p3_ordered(t1, t2, t_end) / g, &self.breaks_in(t1, t_end), &self.cfg)
    }

    /// Total three-photon probability of the zero-width density,
    /// `int_{t1<t2<t3} p_3`.
    pub fn p3_total(&self) -> Result<Estimate> {
        let g = self.sys.gamma;
        let t_end = self.t_end();
        integrate_simplex(
            |ts| self.p3_ordered(ts[0], ts[1], t_end) / g,
            2,
            0.0,
            t_end,
            self.pulse.breakpoints(),
            &self.cfg,
        )
    }

    /// Density that the second emission of an exclusive two-photon
    /// sequence happens at `t`, `int_0^t p_2(t_1, t) dt_1`.
    pub fn p2_second_marginal(&self, t: f64) -> Result<Estimate> {
        check_time(t)?;
        let upper = t.min(self.t_end());
        if upper <= 0.0 {
            return Ok(Estimate::exact(0.0));
        }
        let inner = self.clone().with_quadrature(self.cfg.tightened(10.0));
        let mut failure = None;
        let est = integrate_breakpoints(
            |t1| {
                if t1 >= t {
                    return 0.0;
                }
                match inner.density_p2_joint(t1, t) {
                    Ok(v) => v,
                    Err(e) => {
                        failure.get_or_insert(e);
                        0.0
                    }
                }
            },
            &self.breaks_in(0.0, upper),
            &self.cfg,
        )?;
        match failure {
            Some(e) => Err(e),
            None => Ok(est),
        }
    }

    /// Photon flux `sum_n` over all positions of the exclusive `n`-photon
    /// marginals for `n <= 3`: the expected emission rate at `t`.
    pub fn emission_flux(&self, t: f64) -> Result<Estimate> {
        let p1 = self.marginal_p1(t)?.value;
        let p2_first = self.marginal_p2(t)?.value;
        let p2_second = self.p2_second_marginal(t)?;
        let p3 = self.p3_sym_marginal(t)?.scale(3.0);
        Ok(p1 + p2_first + p2_second + p3)
    }

    /// Marginal densities on an area grid: for each area `a` the density is
    /// evaluated at the earliest time the pulse has delivered `a`.
    pub fn marginals_on_area_axis(&self, areas: &[f64], which: Marginal) -> Result<Vec<DensitySample>> {
        areas
            .iter()
            .map(|&a| {
                let t = self.pulse.inverse_area(a)?;
                let value = match which {
                    Marginal::P1 => self.marginal_p1(t)?.value.value,
                    Marginal::P2 => self.marginal_p2(t)?.value.value,
                    Marginal::P3Sym => self.p3_sym_marginal(t)?.value,
                };
                Ok(DensitySample { t1: a, t2: None, t3: None, value, axis: Axis::Area })
            })
            .collect()
    }
}

/// Selects a marginal density for [`ShortPulseModel::marginals_on_area_axis`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Marginal {
    /// Exclusive single-photon marginal.
    P1,
    /// First emission of an exclusive photon pair.
    P2,
    /// Symmetrized three-photon marginal.
    P3Sym,
}

fn check_time(t: f64) -> Result<()> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidArgument(alloc::format!("time must be finite and >= 0, got {t}")));
    }
    Ok(())
}

fn check_ordered(times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(Error::InvalidArgument("at least one emission time is required".into()));
    }
    check_time(times[0])?;
    if times.windows(2).any(|w| !(w[1] > w[0]) || !w[1].is_finite()) {
        return Err(Error::InvalidArgument("emission times must be strictly increasing".into()));
    }
    Ok(())
}
