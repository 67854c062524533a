//! Drive-pulse envelopes and the cumulative interacted area `A(t)`.
//!
//! The envelope `Omega(t)` is the Rabi rate (dipole coupling times field
//! envelope) in radians per unit time. It is real and non-negative, and
//! every pulse starts interacting at `t = 0`.

use alloc::vec::Vec;
use core::f64::consts::{PI, SQRT_2};

#[allow(unused_imports)] // shadowed by inherent methods whenever std is linked
use num_traits::Float;

use crate::{Error, Result};

/// Ratio between the nominal width `T` of a Gaussian pulse and the
/// standard deviation `sigma` of its field envelope.
///
/// Fixed by requiring the short-pulse two-photon probability of a Gaussian
/// pi pulse to be `0.2188 * gamma * T`. That coefficient equals
/// `K / c` with `K = int sin^2(A(u)) / 4 du = 0.364304...` for a unit-sigma
/// pi pulse, giving `c = 1.66501`. This is `2 sqrt(ln 2)` to four digits,
/// i.e. `T` is the full width at half maximum of the intensity
/// `Omega(t)^2`, and that exact value is used here.
pub const GAUSSIAN_WIDTH_PER_SIGMA: f64 = 1.665_109_222_315_395_4;

/// Half-width, in units of sigma, at which the Gaussian is truncated: the
/// two omitted tails together hold `1e-9` of the area.
pub const GAUSSIAN_HALF_SUPPORT: f64 = 6.109_410_204_869_398;

/// Pulse family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PulseKind {
    /// Constant envelope on `[0, T]`.
    Square,
    /// Truncated Gaussian field envelope.
    Gaussian,
    /// Piecewise-linear envelope through user samples.
    Tabulated,
}

#[derive(Debug, Clone, PartialEq)]
enum Profile {
    Square,
    Gaussian { sigma: f64, center: f64, norm: f64 },
    Tabulated { t: Vec<f64>, omega: Vec<f64>, cum: Vec<f64> },
}

/// A validated, immutable drive pulse.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseShape {
    profile: Profile,
    total_area: f64,
    width: f64,
    support_end: f64,
    breaks: Vec<f64>,
}

fn check_area_width(total_area: f64, width: f64) -> Result<()> {
    if !(total_area >= 0.0 && total_area.is_finite()) {
        return Err(Error::InvalidPulse(alloc::format!("total area must be finite and >= 0, got {total_area}")));
    }
    if !(width > 0.0 && width.is_finite()) {
        return Err(Error::InvalidPulse(alloc::format!("width must be finite and > 0, got {width}")));
    }
    Ok(())
}

/// Construct a square or Gaussian pulse. Tabulated pulses need samples;
/// use [`PulseShape::tabulated`].
pub fn make_pulse(kind: PulseKind, total_area: f64, width: f64) -> Result<PulseShape> {
    match kind {
        PulseKind::Square => PulseShape::square(total_area, width),
        PulseKind::Gaussian => PulseShape::gaussian(total_area, width),
        PulseKind::Tabulated => Err(Error::InvalidPulse("tabulated pulses require samples".into())),
    }
}

impl PulseShape {
    /// Square pulse with `A(t) = total_area * t / width` on `[0, width]`.
    pub fn square(total_area: f64, width: f64) -> Result<Self> {
        check_area_width(total_area, width)?;
        Ok(Self { profile: Profile::Square, total_area, width, support_end: width, breaks: alloc::vec![0.0, width] })
    }

    /// Gaussian pulse of nominal width `width` (intensity FWHM, see
    /// [`GAUSSIAN_WIDTH_PER_SIGMA`]). The envelope is truncated to
    /// `[0, 2 * center]` and renormalized so that the area there is exactly
    /// `total_area`.
    pub fn gaussian(total_area: f64, width: f64) -> Result<Self> {
        check_area_width(total_area, width)?;
        let sigma = width / GAUSSIAN_WIDTH_PER_SIGMA;
        let center = GAUSSIAN_HALF_SUPPORT * sigma;
        let norm = libm::erf(GAUSSIAN_HALF_SUPPORT / SQRT_2);
        let support_end = 2.0 * center;
        Ok(Self {
            profile: Profile::Gaussian { sigma, center, norm },
            total_area,
            width,
            support_end,
            breaks: alloc::vec![0.0, center, support_end],
        })
    }

    /// Piecewise-linear envelope through `(time, rate)` samples, zero
    /// outside the sampled range. With `total_area = Some(a)` the envelope
    /// is rescaled to area `a`; otherwise the sampled area is kept.
    pub fn tabulated(samples: &[(f64, f64)], total_area: Option<f64>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::InvalidPulse("tabulated pulse needs at least two samples".into()));
        }
        if samples[0].0 < 0.0 || !samples[0].0.is_finite() {
            return Err(Error::InvalidPulse("tabulated times must start at t >= 0".into()));
        }
        for w in samples.windows(2) {
            if !(w[1].0 > w[0].0) || !w[1].0.is_finite() {
                return Err(Error::InvalidPulse(alloc::format!(
                    "tabulated times must be strictly increasing ({} then {})",
                    w[0].0,
                    w[1].0
                )));
            }
        }
        if let Some(&(t, w)) = samples.iter().find(|(_, w)| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::InvalidPulse(alloc::format!("envelope at t = {t} must be finite and >= 0, got {w}")));
        }
        let t: Vec<f64> = samples.iter().map(|s| s.0).collect();
        let mut omega: Vec<f64> = samples.iter().map(|s| s.1).collect();
        let mut cum = alloc::vec![0.0; t.len()];
        for i in 1..t.len() {
            cum[i] = cum[i - 1] + 0.5 * (omega[i] + omega[i - 1]) * (t[i] - t[i - 1]);
        }
        let natural = cum[cum.len() - 1];
        let area = match total_area {
            Some(a) => {
                check_area_width(a, 1.0)?;
                if a > 0.0 && natural == 0.0 {
                    return Err(Error::InvalidPulse("cannot rescale an all-zero envelope".into()));
                }
                let scale = if natural > 0.0 { a / natural } else { 0.0 };
                omega.iter_mut().for_each(|w| *w *= scale);
                cum.iter_mut().for_each(|c| *c *= scale);
                let last = cum.len() - 1;
                cum[last] = a;
                a
            }
            None => natural,
        };
        let width = t[t.len() - 1] - t[0];
        let support_end = t[t.len() - 1];
        let mut breaks = alloc::vec![0.0];
        breaks.extend(t.iter().copied().filter(|&x| x > 0.0));
        Ok(Self { profile: Profile::Tabulated { t, omega, cum }, total_area: area, width, support_end, breaks })
    }

    /// Pulse family.
    pub fn kind(&self) -> PulseKind {
        match self.profile {
            Profile::Square => PulseKind::Square,
            Profile::Gaussian { .. } => PulseKind::Gaussian,
            Profile::Tabulated { .. } => PulseKind::Tabulated,
        }
    }

    /// `A(inf)`.
    pub fn total_area(&self) -> f64 {
        self.total_area
    }

    /// Nominal width `T`.
    pub fn width(&self) -> f64 {
        self.width
    }

    /// Time after which the envelope vanishes, so `A(t) = A(inf)` for
    /// `t >= support_end()`. Equals the width for square pulses.
    pub fn support_end(&self) -> f64 {
        self.support_end
    }

    /// Peak position of a Gaussian pulse.
    pub fn center(&self) -> Option<f64> {
        match self.profile {
            Profile::Gaussian { center, .. } => Some(center),
            _ => None,
        }
    }

    /// Times where the envelope is not smooth (including `0` and the end of
    /// the support), in increasing order.
    pub fn breakpoints(&self) -> &[f64] {
        &self.breaks
    }

    /// Same shape with the envelope scaled to a new total area.
    pub fn with_area(&self, total_area: f64) -> Result<Self> {
        match &self.profile {
            Profile::Square => Self::square(total_area, self.width),
            Profile::Gaussian { .. } => Self::gaussian(total_area, self.width),
            Profile::Tabulated { t, omega, .. } => {
                let samples: Vec<(f64, f64)> = t.iter().copied().zip(omega.iter().copied()).collect();
                Self::tabulated(&samples, Some(total_area))
            }
        }
    }

    /// Rabi rate `Omega(t)`; zero outside the support.
    pub fn envelope(&self, t: f64) -> f64 {
        match &self.profile {
            Profile::Square => {
                if (0.0..=self.width).contains(&t) {
                    self.total_area / self.width
                } else {
                    0.0
                }
            }
            Profile::Gaussian { sigma, center, norm } => {
                if !(0.0..=self.support_end).contains(&t) {
                    return 0.0;
                }
                let z = (t - center) / sigma;
                self.total_area / (sigma * (2.0 * PI).sqrt() * norm) * (-0.5 * z * z).exp()
            }
            Profile::Tabulated { t: ts, omega, .. } => {
                if t < ts[0] || t > ts[ts.len() - 1] {
                    return 0.0;
                }
                let i = ts.partition_point(|&x| x <= t).clamp(1, ts.len() - 1);
                let (t0, t1) = (ts[i - 1], ts[i]);
                let s = (t - t0) / (t1 - t0);
                omega[i - 1] + s * (omega[i] - omega[i - 1])
            }
        }
    }

    /// `A(t) = int_0^t Omega`. Zero for `t <= 0`.
    pub fn cumulative_area(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        if t >= self.support_end {
            return self.total_area;
        }
        match &self.profile {
            Profile::Square => self.total_area * t / self.width,
            Profile::Gaussian { sigma, center, norm } => {
                let lo = libm::erf(-center / (sigma * SQRT_2));
                let hi = libm::erf((t - center) / (sigma * SQRT_2));
                (self.total_area * 0.5 * (hi - lo) / norm).clamp(0.0, self.total_area)
            }
            Profile::Tabulated { t: ts, omega, cum } => {
                if t <= ts[0] {
                    return 0.0;
                }
                let i = ts.partition_point(|&x| x <= t).clamp(1, ts.len() - 1);
                let (t0, t1) = (ts[i - 1], ts[i]);
                let dt = t - t0;
                let slope = (omega[i] - omega[i - 1]) / (t1 - t0);
                cum[i - 1] + omega[i - 1] * dt + 0.5 * slope * dt * dt
            }
        }
    }

    /// Smallest `t` with `A(t) >= a`.
    pub fn inverse_area(&self, a: f64) -> Result<f64> {
        if !(a >= 0.0 && a <= self.total_area) {
            return Err(Error::InvalidArgument(alloc::format!(
                "area {a} outside [0, {}]",
                self.total_area
            )));
        }
        if a == 0.0 {
            return Ok(0.0);
        }
        if let Profile::Square = self.profile {
            return Ok(self.width * a / self.total_area);
        }
        let tol = 1e-10 * self.width;
        let (mut lo, mut hi) = (0.0, self.support_end);
        while hi - lo > tol {
            let mid = 0.5 * (lo + hi);
            if self.cumulative_area(mid) >= a {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(hi)
    }
}
