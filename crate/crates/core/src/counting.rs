//! Photocount distributions and emission-density samples.

use alloc::vec::Vec;

use crate::{Error, Result};

/// Which computation produced a distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Provenance {
    /// Short-pulse counting hierarchy evaluated by quadrature.
    AnalyticShortPulse,
    /// Closed-form square-pulse expressions.
    ClosedFormSquare,
    /// Ordered-time quadrature of exact conditional densities.
    ExactOracle,
    /// Photon-number-resolved master equation.
    NumberResolved,
    /// Histogram of sampled jump trajectories.
    MonteCarlo,
}

impl Provenance {
    /// Short lowercase label.
    pub fn label(self) -> &'static str {
        match self {
            Provenance::AnalyticShortPulse => "analytic",
            Provenance::ClosedFormSquare => "closed-form",
            Provenance::ExactOracle => "exact",
            Provenance::NumberResolved => "number-resolved",
            Provenance::MonteCarlo => "monte-carlo",
        }
    }
}

/// Truncated photocount distribution.
///
/// `inclusive[k]` is `F_{k+1}`, the probability of `k+1` or more
/// emissions; `exclusive[n]` is `P_n`, the probability of exactly `n`
/// emissions, for `n = 0..=n_max`. The tail beyond `n_max` is bounded by
/// `truncation_bound`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhotocountDistribution {
    inclusive: Vec<f64>,
    exclusive: Vec<f64>,
    truncation_bound: f64,
    error_estimate: f64,
    provenance: Provenance,
}

impl PhotocountDistribution {
    /// Build from inclusive probabilities `F_1..=F_{n_max+1}`; the last one
    /// becomes the truncation bound.
    ///
    /// `error_estimate` is the absolute error of the inputs. Exclusive
    /// values more negative than ten times that estimate are rejected.
    pub fn from_inclusive(inclusive: &[f64], error_estimate: f64, provenance: Provenance) -> Result<Self> {
        if inclusive.len() < 2 {
            return Err(Error::InvalidArgument("need at least F_1 and F_2".into()));
        }
        let eps = quad_slack(error_estimate);
        let n_max = inclusive.len() - 1;
        let mut exclusive = Vec::with_capacity(n_max + 1);
        exclusive.push(1.0 - inclusive[0]);
        for n in 1..=n_max {
            exclusive.push(inclusive[n - 1] - inclusive[n]);
        }
        for (n, &p) in exclusive.iter().enumerate() {
            if p < -eps {
                return Err(Error::NegativeProbability { n, value: p, tolerance: eps });
            }
        }
        Ok(Self {
            inclusive: inclusive[..n_max].to_vec(),
            exclusive,
            truncation_bound: inclusive[n_max].max(0.0),
            error_estimate,
            provenance,
        })
    }

    /// Build from exclusive probabilities `P_0..=P_{n_max}` plus the mass
    /// beyond `n_max`.
    pub fn from_exclusive(exclusive: Vec<f64>, truncation_bound: f64, error_estimate: f64, provenance: Provenance) -> Result<Self> {
        if exclusive.len() < 2 {
            return Err(Error::InvalidArgument("need at least P_0 and P_1".into()));
        }
        let eps = quad_slack(error_estimate);
        if let Some((n, &p)) = exclusive.iter().enumerate().find(|(_, &p)| p < -eps) {
            return Err(Error::NegativeProbability { n, value: p, tolerance: eps });
        }
        let n_max = exclusive.len() - 1;
        let mut inclusive = alloc::vec![0.0; n_max];
        let mut tail = truncation_bound;
        for n in (1..=n_max).rev() {
            tail += exclusive[n];
            inclusive[n - 1] = tail;
        }
        Ok(Self { inclusive, exclusive, truncation_bound, error_estimate, provenance })
    }

    /// Largest photon number resolved.
    pub fn n_max(&self) -> usize {
        self.exclusive.len() - 1
    }

    /// `P_n` (zero beyond `n_max`).
    pub fn p(&self, n: usize) -> f64 {
        self.exclusive.get(n).copied().unwrap_or(0.0)
    }

    /// `F_n` for `1 <= n <= n_max + 1`; `F_0 = 1`.
    pub fn f(&self, n: usize) -> f64 {
        match n {
            0 => 1.0,
            n if n <= self.inclusive.len() => self.inclusive[n - 1],
            n if n == self.inclusive.len() + 1 => self.truncation_bound,
            _ => 0.0,
        }
    }

    /// Exclusive probabilities `P_0..=P_{n_max}`.
    pub fn exclusive(&self) -> &[f64] {
        &self.exclusive
    }

    /// Inclusive probabilities `F_1..=F_{n_max}`.
    pub fn inclusive(&self) -> &[f64] {
        &self.inclusive
    }

    /// Upper bound on the probability of more than `n_max` emissions.
    pub fn truncation_bound(&self) -> f64 {
        self.truncation_bound
    }

    /// Absolute error estimate carried from the computation.
    pub fn error_estimate(&self) -> f64 {
        self.error_estimate
    }

    /// Accepted numerical negativity of exclusive probabilities.
    pub fn tolerance(&self) -> f64 {
        quad_slack(self.error_estimate)
    }

    /// Origin of the numbers.
    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    /// Sum of the resolved exclusive probabilities.
    pub fn resolved_mass(&self) -> f64 {
        self.exclusive.iter().sum()
    }
}

fn quad_slack(error_estimate: f64) -> f64 {
    10.0 * error_estimate + 1e-14
}

/// Which variable a density sample is indexed by.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    /// Emission times.
    Time,
    /// Interacted pulse area at the emission times.
    Area,
}

/// A probability density evaluated at up to three emission coordinates.
///
/// Values are densities per unit time (per `time^n`) even on the area
/// axis; the coordinates are then areas mapped back to times through the
/// pulse's cumulative area.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensitySample {
    /// First coordinate.
    pub t1: f64,
    /// Second coordinate, when the density has one.
    pub t2: Option<f64>,
    /// Third coordinate, when the density has one.
    pub t3: Option<f64>,
    /// Density value.
    pub value: f64,
    /// Meaning of the coordinates.
    pub axis: Axis,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inclusive_to_exclusive() {
        let d = PhotocountDistribution::from_inclusive(&[0.9, 0.2, 0.05, 0.01], 0.0, Provenance::ExactOracle).unwrap();
        assert_eq!(d.n_max(), 3);
        let p = d.exclusive();
        assert!((p[0] - 0.1).abs() < 1e-15);
        assert!((p[1] - 0.7).abs() < 1e-15);
        assert!((p[2] - 0.15).abs() < 1e-15);
        assert!((p[3] - 0.04).abs() < 1e-15);
        assert_eq!(d.truncation_bound(), 0.01);
        assert!((d.resolved_mass() + d.truncation_bound() - 1.0).abs() < 1e-15);
        assert_eq!(d.f(4), 0.01);
    }

    #[test]
    fn negative_probability_rejected() {
        let r = PhotocountDistribution::from_inclusive(&[0.5, 0.6], 1e-6, Provenance::AnalyticShortPulse);
        assert!(matches!(r, Err(Error::NegativeProbability { n: 1, .. })));
        // Within slack is accepted.
        assert!(PhotocountDistribution::from_inclusive(&[0.5, 0.500001], 1e-6, Provenance::AnalyticShortPulse).is_ok());
    }

    #[test]
    fn exclusive_round_trip() {
        let d = PhotocountDistribution::from_exclusive(alloc::vec![0.2, 0.5, 0.3], 0.0, 0.0, Provenance::MonteCarlo).unwrap();
        assert!((d.f(1) - 0.8).abs() < 1e-15);
        assert!((d.f(2) - 0.3).abs() < 1e-15);
        assert_eq!(d.f(3), 0.0);
    }
}
