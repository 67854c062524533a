//! Pulse-wise observables of a photocount distribution.

use alloc::vec::Vec;

use crate::counting::PhotocountDistribution;
use crate::{Error, Result};

pub use crate::analytic::g2_zero_short_pulse;

/// Mean photon number `sum_k k P_k` over the resolved photon numbers.
pub fn expected_n(d: &PhotocountDistribution) -> f64 {
    d.exclusive().iter().enumerate().map(|(k, p)| k as f64 * p).sum()
}

fn factorial_moment(d: &PhotocountDistribution) -> f64 {
    d.exclusive().iter().enumerate().map(|(k, p)| (k * k.saturating_sub(1)) as f64 * p).sum()
}

/// Degree of second-order coherence `sum_k k(k-1) P_k / E[n]^2`.
pub fn g2_zero(d: &PhotocountDistribution) -> Result<f64> {
    let mean = expected_n(d);
    if !(mean > 0.0) {
        return Err(Error::Undefined("g2[0] needs E[n] > 0"));
    }
    Ok(factorial_moment(d) / (mean * mean))
}

/// Relative photon-number variance `sum_k (k^2 - E[n]^2) P_k / E[n]`; 1 for
/// Poissonian light.
pub fn variance_rel(d: &PhotocountDistribution) -> Result<f64> {
    let mean = expected_n(d);
    if !(mean > 0.0) {
        return Err(Error::Undefined("relative variance needs E[n] > 0"));
    }
    let m2 = mean * mean;
    let s: f64 = d.exclusive().iter().enumerate().map(|(k, p)| ((k * k) as f64 - m2) * p).sum();
    Ok(s / mean)
}

/// Photon-number purities `pi_n = P_n / sum_{m>0} P_m` for `n = 1..=n_max`.
pub fn purities(d: &PhotocountDistribution) -> Result<Vec<f64>> {
    let non_vacuum: f64 = d.exclusive()[1..].iter().sum();
    if !(non_vacuum > 0.0) {
        return Err(Error::Undefined("purities need a non-vacuum component"));
    }
    Ok(d.exclusive()[1..].iter().map(|p| p / non_vacuum).collect())
}

/// Summary statistics of one distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct EmissionStatistics {
    /// `E[n]`.
    pub mean_n: f64,
    /// `g2[0]`, `None` when `E[n] = 0`.
    pub g2_zero: Option<f64>,
    /// Relative variance, `None` when `E[n] = 0`.
    pub var_rel: Option<f64>,
    /// `pi_1..pi_{n_max}`, empty for an all-vacuum distribution.
    pub purities: Vec<f64>,
    /// Set when `n_max * truncation_bound` exceeds 1% of any reported
    /// statistic.
    pub truncation_sensitive: bool,
}

impl EmissionStatistics {
    /// Evaluate every statistic of `d`.
    pub fn summarize(d: &PhotocountDistribution) -> Self {
        let mean_n = expected_n(d);
        let g2 = g2_zero(d).ok();
        let var_rel = variance_rel(d).ok();
        let purities = purities(d).unwrap_or_default();
        let slack = d.n_max() as f64 * d.truncation_bound();
        let sensitive = |x: f64| slack > 0.01 * x.abs();
        let truncation_sensitive = sensitive(mean_n)
            || g2.is_some_and(sensitive)
            || var_rel.is_some_and(sensitive)
            || purities.iter().any(|&p| p > 0.0 && sensitive(p));
        Self { mean_n, g2_zero: g2, var_rel, purities, truncation_sensitive }
    }
}
