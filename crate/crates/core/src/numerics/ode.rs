use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by inherent methods whenever std is linked
use num_traits::Float;

use crate::{Error, Result};

/// Stepping scheme for [`integrate_ode`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OdeMethod {
    /// Classical fourth-order Runge-Kutta with a fixed step no larger than
    /// `max_step`.
    Rk4,
    /// Adaptive Dormand-Prince 5(4) pair with embedded error control.
    DormandPrince,
}

/// ODE integrator settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeConfig {
    /// Stepping scheme.
    pub method: OdeMethod,
    /// Relative local error tolerance (adaptive method only).
    pub rel_tol: f64,
    /// Absolute local error tolerance (adaptive method only).
    pub abs_tol: f64,
    /// Largest step magnitude; the fixed step for [`OdeMethod::Rk4`].
    pub max_step: f64,
}

impl Default for OdeConfig {
    fn default() -> Self {
        Self { method: OdeMethod::DormandPrince, rel_tol: 1e-11, abs_tol: 1e-14, max_step: f64::INFINITY }
    }
}

impl OdeConfig {
    /// Fixed-step RK4 with the given step.
    pub fn rk4(step: f64) -> Self {
        Self { method: OdeMethod::Rk4, max_step: step, ..Self::default() }
    }

    fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0 && self.max_step > 0.0) {
            return Err(Error::InvalidArgument(alloc::format!("bad ODE configuration {self:?}")));
        }
        if self.method == OdeMethod::Rk4 && !self.max_step.is_finite() {
            return Err(Error::InvalidArgument("RK4 needs a finite step".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
enum Interpolant<const N: usize> {
    // Dormand-Prince continuous extension (Hairer's five coefficient rows).
    Dopri([[f64; N]; 5]),
    // Cubic Hermite through both end values and slopes.
    Hermite { y0: [f64; N], y1: [f64; N], f0: [f64; N], f1: [f64; N] },
}

#[derive(Debug, Clone)]
struct Step<const N: usize> {
    t: f64,
    h: f64,
    dense: Interpolant<N>,
}

impl<const N: usize> Step<N> {
    fn eval(&self, t: f64) -> [f64; N] {
        let s = ((t - self.t) / self.h).clamp(0.0, 1.0);
        let s1 = 1.0 - s;
        let mut y = [0.0; N];
        match &self.dense {
            Interpolant::Dopri(r) => {
                for i in 0..N {
                    y[i] = r[0][i] + s * (r[1][i] + s1 * (r[2][i] + s * (r[3][i] + s1 * r[4][i])));
                }
            }
            Interpolant::Hermite { y0, y1, f0, f1 } => {
                let h00 = (1.0 + 2.0 * s) * s1 * s1;
                let h10 = s * s1 * s1;
                let h01 = s * s * (3.0 - 2.0 * s);
                let h11 = -s * s * s1;
                for i in 0..N {
                    y[i] = h00 * y0[i] + h10 * self.h * f0[i] + h01 * y1[i] + h11 * self.h * f1[i];
                }
            }
        }
        y
    }
}

/// Dense solution of an initial value problem on `[t0, t1]` (either
/// direction).
#[derive(Debug, Clone)]
pub struct OdeSolution<const N: usize> {
    t0: f64,
    t1: f64,
    y0: [f64; N],
    y1: [f64; N],
    steps: Vec<Step<N>>,
}

impl<const N: usize> OdeSolution<N> {
    /// Start of the integration span.
    pub fn t_start(&self) -> f64 {
        self.t0
    }

    /// End of the integration span.
    pub fn t_end(&self) -> f64 {
        self.t1
    }

    /// State at the end of the span.
    pub fn final_state(&self) -> [f64; N] {
        self.y1
    }

    /// Number of accepted steps.
    pub fn step_count(&self) -> usize {
        self.steps.len()
    }

    /// Times at which accepted steps end, in integration order.
    pub fn step_ends(&self) -> impl Iterator<Item = f64> + '_ {
        self.steps.iter().map(|s| s.t + s.h)
    }

    /// Interpolated state at `t`, clamped to the integration span.
    pub fn at(&self, t: f64) -> [f64; N] {
        if self.steps.is_empty() {
            return self.y0;
        }
        let forward = self.t1 >= self.t0;
        // First step whose end lies beyond t in the integration direction.
        let idx = self.steps.partition_point(|s| {
            let end = s.t + s.h;
            if forward {
                end < t
            } else {
                end > t
            }
        });
        let idx = idx.min(self.steps.len() - 1);
        self.steps[idx].eval(t)
    }

    /// States at each of `times`.
    pub fn sample(&self, times: &[f64]) -> Vec<[f64; N]> {
        times.iter().map(|&t| self.at(t)).collect()
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

#[inline]
fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (c, k) in terms {
        let ch = c * h;
        for i in 0..N {
            out[i] += ch * k[i];
        }
    }
    out
}

/// Integrate `dy/dt = rhs(t, y)` from `t0` to `t1` starting at `y0`.
///
/// The returned solution interpolates the state anywhere in the span.
/// `t1 < t0` integrates backwards.
pub fn integrate_ode<const N: usize, F>(
    mut rhs: F,
    y0: [f64; N],
    t0: f64,
    t1: f64,
    cfg: &OdeConfig,
) -> Result<OdeSolution<N>>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    cfg.validate()?;
    if !(t0.is_finite() && t1.is_finite()) {
        return Err(Error::InvalidArgument("ODE span must be finite".into()));
    }
    let mut sol = OdeSolution { t0, t1, y0, y1: y0, steps: Vec::new() };
    if t0 == t1 {
        return Ok(sol);
    }
    match cfg.method {
        OdeMethod::Rk4 => rk4(&mut rhs, &mut sol, cfg.max_step),
        OdeMethod::DormandPrince => dopri5(&mut rhs, &mut sol, cfg)?,
    }
    Ok(sol)
}

fn rk4<const N: usize, F>(rhs: &mut F, sol: &mut OdeSolution<N>, step: f64)
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    let span = sol.t1 - sol.t0;
    let n = (span.abs() / step).ceil().max(1.0) as usize;
    let h = span / n as f64;
    let mut y = sol.y0;
    let mut f0 = rhs(sol.t0, &y);
    for k in 0..n {
        let t = sol.t0 + k as f64 * h;
        let k1 = f0;
        let k2 = rhs(t + 0.5 * h, &axpy(&y, h, &[(0.5, &k1)]));
        let k3 = rhs(t + 0.5 * h, &axpy(&y, h, &[(0.5, &k2)]));
        let k4 = rhs(t + h, &axpy(&y, h, &[(1.0, &k3)]));
        let y1 = axpy(&y, h, &[(1.0 / 6.0, &k1), (1.0 / 3.0, &k2), (1.0 / 3.0, &k3), (1.0 / 6.0, &k4)]);
        let t_next = if k + 1 == n { sol.t1 } else { sol.t0 + (k + 1) as f64 * h };
        let f1 = rhs(t_next, &y1);
        sol.steps.push(Step { t, h: t_next - t, dense: Interpolant::Hermite { y0: y, y1, f0, f1 } });
        y = y1;
        f0 = f1;
    }
    sol.y1 = y;
}

fn error_norm<const N: usize>(err: &[f64; N], y0: &[f64; N], y1: &[f64; N], cfg: &OdeConfig) -> f64 {
    let mut acc = 0.0;
    for i in 0..N {
        let sc = cfg.abs_tol + cfg.rel_tol * y0[i].abs().max(y1[i].abs());
        let r = err[i] / sc;
        acc += r * r;
    }
    (acc / N as f64).sqrt()
}

fn dopri5<const N: usize, F>(rhs: &mut F, sol: &mut OdeSolution<N>, cfg: &OdeConfig) -> Result<()>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    let dir = (sol.t1 - sol.t0).signum();
    let span = (sol.t1 - sol.t0).abs();
    let mut t = sol.t0;
    let mut y = sol.y0;
    let mut k1 = rhs(t, &y);

    // Initial step guess from the scale of y and y'.
    let mut d0 = 0.0;
    let mut d1 = 0.0;
    for i in 0..N {
        let sc = cfg.abs_tol + cfg.rel_tol * y[i].abs();
        d0 += (y[i] / sc).powi(2);
        d1 += (k1[i] / sc).powi(2);
    }
    let (d0, d1) = ((d0 / N as f64).sqrt(), (d1 / N as f64).sqrt());
    let mut h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 * span.max(1e-3) } else { 0.01 * d0 / d1 };
    h = h.min(cfg.max_step).min(span).max(1e-12 * span);

    let mut rejected = false;
    loop {
        let remaining = (sol.t1 - t) * dir;
        if remaining <= 0.0 {
            break;
        }
        let last = h >= remaining;
        if last {
            h = remaining;
        }
        let hs = h * dir;
        let k2 = rhs(t + C2 * hs, &axpy(&y, hs, &[(A21, &k1)]));
        let k3 = rhs(t + C3 * hs, &axpy(&y, hs, &[(A31, &k1), (A32, &k2)]));
        let k4 = rhs(t + C4 * hs, &axpy(&y, hs, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
        let k5 = rhs(t + C5 * hs, &axpy(&y, hs, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
        let t_new = if last { sol.t1 } else { t + hs };
        let k6 = rhs(
            t + hs,
            &axpy(&y, hs, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
        );
        let y1 = axpy(&y, hs, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
        let k7 = rhs(t_new, &y1);
        let mut err = [0.0; N];
        for i in 0..N {
            err[i] = hs * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        }
        let en = error_norm(&err, &y, &y1, cfg);

        if en <= 1.0 {
            let mut r = [[0.0; N]; 5];
            for i in 0..N {
                let ydiff = y1[i] - y[i];
                let bspl = hs * k1[i] - ydiff;
                r[0][i] = y[i];
                r[1][i] = ydiff;
                r[2][i] = bspl;
                r[3][i] = ydiff - hs * k7[i] - bspl;
                r[4][i] = hs
                    * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
            }
            sol.steps.push(Step { t, h: t_new - t, dense: Interpolant::Dopri(r) });
            t = t_new;
            y = y1;
            k1 = k7;
            let mut fac = if en == 0.0 { 5.0 } else { 0.9 * en.powf(-0.2) };
            fac = fac.clamp(0.2, 5.0);
            if rejected {
                fac = fac.min(1.0);
            }
            rejected = false;
            h = (h * fac).min(cfg.max_step);
            if last {
                break;
            }
        } else {
            rejected = true;
            h *= (0.9 * en.powf(-0.2)).max(0.2);
        }
        if h < 1e-14 * t.abs().max(span) {
            return Err(Error::StepSizeUnderflow { t });
        }
    }
    sol.y1 = y;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    #[test]
    fn exponential_decay() {
        let sol = integrate_ode(|_, y: &[f64; 1]| [-y[0]], [1.0], 0.0, 1.0, &OdeConfig::default()).unwrap();
        assert!((sol.final_state()[0] - libm::exp(-1.0)).abs() < 1e-11);
        for k in 0..=20 {
            let t = k as f64 / 20.0;
            assert!((sol.at(t)[0] - libm::exp(-t)).abs() < 1e-10, "dense at {t}");
        }
        let sol = integrate_ode(|_, y: &[f64; 1]| [-y[0]], [1.0], 0.0, 1.0, &OdeConfig::rk4(1e-3)).unwrap();
        assert!((sol.final_state()[0] - libm::exp(-1.0)).abs() < 1e-12);
        assert!((sol.at(0.5004)[0] - libm::exp(-0.5004)).abs() < 1e-10);
    }

    #[test]
    fn backward_integration() {
        let sol = integrate_ode(|_, y: &[f64; 1]| [-y[0]], [1.0], 1.0, 0.0, &OdeConfig::default()).unwrap();
        assert!((sol.final_state()[0] - libm::exp(1.0)).abs() < 1e-9);
        assert!((sol.at(0.25)[0] - libm::exp(0.75)).abs() < 1e-9);
    }

    // Lossless Rabi rotation: g' = (W/2) e, e' = -(W/2) g.
    fn rabi(area: f64, method: OdeConfig) -> [f64; 2] {
        let w = area; // unit duration
        integrate_ode(move |_, y: &[f64; 2]| [0.5 * w * y[1], -0.5 * w * y[0]], [1.0, 0.0], 0.0, 1.0, &method)
            .unwrap()
            .final_state()
    }

    #[test]
    fn rabi_pi_and_two_pi() {
        for cfg in [OdeConfig::default(), OdeConfig::rk4(1e-3)] {
            let y = rabi(PI, cfg);
            assert!((y[1] * y[1] - 1.0).abs() < 1e-8);
            let y = rabi(2.0 * PI, cfg);
            assert!(y[1] * y[1] < 1e-8);
        }
    }

    #[test]
    fn rejects_bad_config() {
        let cfg = OdeConfig { rel_tol: -1.0, ..Default::default() };
        assert!(integrate_ode(|_, y: &[f64; 1]| *y, [1.0], 0.0, 1.0, &cfg).is_err());
        assert!(integrate_ode(|_, y: &[f64; 1]| *y, [1.0], 0.0, 1.0, &OdeConfig { method: OdeMethod::Rk4, ..Default::default() }).is_err());
    }

    #[test]
    fn underflow_reported() {
        // Finite-time blow-up at t = 1.
        let r = integrate_ode(|_, y: &[f64; 1]| [y[0] * y[0]], [1.0], 0.0, 2.0, &OdeConfig::default());
        assert!(matches!(r, Err(Error::StepSizeUnderflow { .. })));
    }
}
