use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by inherent methods whenever std is linked
use num_traits::Float;

use super::conditional::NoJumpPath;
use super::state::TwoLevelState;
use super::OracleConfig;
use crate::analytic::SystemParams;
use crate::counting::{PhotocountDistribution, Provenance};
use crate::numerics::RandomStream;
use crate::pulse::PulseShape;
use crate::{Error, Result};

/// One sampled jump trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    /// Emission times, increasing.
    pub emission_times: Vec<f64>,
    /// Number of emissions.
    pub count: usize,
    /// Normalized conditional state at the horizon.
    pub final_state: TwoLevelState,
    /// Seed of the stream this trajectory was drawn from.
    pub seed: u64,
    /// Excited population of the normalized conditional state at the
    /// requested sample times (empty unless requested).
    pub populations: Vec<f64>,
}

/// Draws jump trajectories by inverse-CDF sampling of the no-jump
/// survival: draw `u` in `(0, 1)`, evolve until the squared norm falls to
/// `u`, emit, reset to `|g>` and repeat.
///
/// Trajectory `i` uses sub-stream `i` of the seed, so trajectories can be
/// drawn in any order or in parallel.
#[derive(Debug, Clone)]
pub struct TrajectorySampler<'a> {
    pulse: &'a PulseShape,
    sys: SystemParams,
    cfg: OracleConfig,
    stream: RandomStream,
    initial: TwoLevelState,
    horizon: f64,
    sample_times: Vec<f64>,
}

impl<'a> TrajectorySampler<'a> {
    /// Sampler starting every trajectory in `|g>`, with horizon
    /// `T + horizon_lifetimes / gamma`.
    pub fn new(pulse: &'a PulseShape, sys: SystemParams, stream: RandomStream, cfg: OracleConfig) -> Self {
        let tail = if sys.gamma > 0.0 { cfg.horizon_lifetimes / sys.gamma } else { 0.0 };
        Self {
            pulse,
            sys,
            cfg,
            stream,
            initial: TwoLevelState::ground(),
            horizon: pulse.support_end() + tail,
            sample_times: Vec::new(),
        }
    }

    /// Start from `state` instead of `|g>`.
    pub fn with_initial_state(mut self, state: TwoLevelState) -> Result<Self> {
        self.initial = state.normalized()?;
        Ok(self)
    }

    /// Override the horizon.
    pub fn with_horizon(mut self, horizon: f64) -> Result<Self> {
        if !(horizon >= 0.0 && horizon.is_finite()) {
            return Err(Error::InvalidArgument(alloc::format!("horizon must be finite and >= 0, got {horizon}")));
        }
        self.horizon = horizon;
        Ok(self)
    }

    /// Record the excited population at these increasing times.
    pub fn with_population_samples(mut self, times: &[f64]) -> Result<Self> {
        if times.windows(2).any(|w| !(w[1] >= w[0])) || times.iter().any(|t| !(*t >= 0.0)) {
            return Err(Error::InvalidArgument("sample times must be >= 0 and non-decreasing".into()));
        }
        self.sample_times = times.to_vec();
        Ok(self)
    }

    /// Horizon in use.
    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// Trajectory number `index`.
    pub fn sample(&self, index: u64) -> Result<TrajectoryRecord> {
        let mut rng = self.stream.substream(index);
        let gamma = self.sys.gamma;
        let pulse_end = self.pulse.support_end();
        let mut times = Vec::new();
        let mut populations = Vec::with_capacity(self.sample_times.len());
        let mut next_sample = 0;
        let mut state = self.initial;
        let mut t0 = 0.0;
        let final_state = loop {
            let path = NoJumpPath::new(self.pulse, self.sys, state, t0, &self.cfg.ode)?;
            let jump = if gamma > 0.0 { self.find_jump(&path, rng.next_open01())? } else { None };
            let stop = jump.unwrap_or(f64::INFINITY).min(self.horizon);
            while next_sample < self.sample_times.len() && self.sample_times[next_sample] < stop {
                populations.push(path.state(self.sample_times[next_sample]).excited_population());
                next_sample += 1;
            }
            match jump {
                Some(tj) if tj <= self.horizon => {
                    times.push(tj);
                    state = TwoLevelState::ground();
                    t0 = tj;
                    if tj >= pulse_end {
                        // No drive left: the ground state stays put.
                        populations.resize(self.sample_times.len(), 0.0);
                        break state;
                    }
                }
                _ => {
                    let end = path.state(self.horizon.max(t0)).normalized()?;
                    while next_sample < self.sample_times.len() {
                        populations.push(path.state(self.sample_times[next_sample]).excited_population());
                        next_sample += 1;
                    }
                    break end;
                }
            }
        };
        Ok(TrajectoryRecord {
            count: times.len(),
            emission_times: times,
            final_state,
            seed: self.stream.seed(),
            populations,
        })
    }

    // Time at which the squared norm reaches `u`, or None if it never does.
    fn find_jump(&self, path: &NoJumpPath, u: f64) -> Result<Option<f64>> {
        let gamma = self.sys.gamma;
        let start = path.start();
        let pulse_end = path.pulse_end();
        if start < pulse_end {
            let mut lo = start;
            for hi in path.step_ends().chain(core::iter::once(pulse_end)) {
                if hi <= lo {
                    continue;
                }
                if path.norm_sqr(hi) <= u {
                    return Ok(Some(bisect(path, u, lo, hi, 1e-8 / gamma)));
                }
                lo = hi;
            }
        }
        let s = path.at_pulse_end();
        let (pg, pe) = (s.g.norm_sqr(), s.e.norm_sqr());
        if u <= pg || pe <= 0.0 {
            return Ok(None);
        }
        Ok(Some(pulse_end + (pe / (u - pg)).ln() / gamma))
    }
}

fn bisect(path: &NoJumpPath, u: f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if path.norm_sqr(mid) <= u {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// `n_traj` trajectories drawn sequentially from sub-streams `0..n_traj`.
pub fn sample_trajectories(
    pulse: &PulseShape,
    sys: SystemParams,
    n_traj: usize,
    stream: &RandomStream,
    cfg: &OracleConfig,
) -> Result<Vec<TrajectoryRecord>> {
    if n_traj == 0 {
        return Err(Error::InvalidArgument("need at least one trajectory".into()));
    }
    let sampler = TrajectorySampler::new(pulse, sys, stream.clone(), *cfg);
    (0..n_traj as u64).map(|i| sampler.sample(i)).collect()
}

/// Empirical photocount distribution `P_0..=P_{n_max}`; the fraction of
/// trajectories with more emissions becomes the truncation bound and the
/// largest binomial standard error the error estimate.
pub fn count_distribution<I>(counts: I, n_max: usize) -> Result<PhotocountDistribution>
where
    I: IntoIterator<Item = usize>,
{
    let mut hist = alloc::vec![0usize; n_max + 2];
    let mut total = 0usize;
    for c in counts {
        hist[c.min(n_max + 1)] += 1;
        total += 1;
    }
    if total == 0 || n_max == 0 {
        return Err(Error::InvalidArgument("need trajectories and n_max >= 1".into()));
    }
    let n = total as f64;
    let freq: Vec<f64> = hist.iter().map(|&h| h as f64 / n).collect();
    let err = freq.iter().map(|p| (p * (1.0 - p) / n).sqrt()).fold(0.0, f64::max);
    PhotocountDistribution::from_exclusive(freq[..=n_max].to_vec(), freq[n_max + 1], err, Provenance::MonteCarlo)
}

/// Sample mean and its standard error.
pub fn mean_and_standard_error(values: &[f64]) -> Result<(f64, f64)> {
    if values.len() < 2 {
        return Err(Error::InvalidArgument("need at least two values".into()));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok((mean, (var / n).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    #[test]
    fn lossless_never_emits() {
        let p = PulseShape::square(PI, 1.0).unwrap();
        let recs = sample_trajectories(&p, SystemParams::lossless(), 50, &RandomStream::new(1), &OracleConfig::default()).unwrap();
        assert!(recs.iter().all(|r| r.count == 0 && r.emission_times.is_empty()));
    }

    #[test]
    fn inverted_emitter_emits_once() {
        let p = PulseShape::square(PI, 1e-3).unwrap();
        let sys = SystemParams::default();
        let recs = sample_trajectories(&p, sys, 200, &RandomStream::new(3), &OracleConfig::default()).unwrap();
        let ones = recs.iter().filter(|r| r.count == 1).count();
        assert!(ones >= 195);
        for r in &recs {
            assert!(r.emission_times.windows(2).all(|w| w[1] > w[0]));
        }
    }

    #[test]
    fn histogram() {
        let d = count_distribution([0, 1, 1, 2, 5], 2).unwrap();
        assert_eq!(d.exclusive(), &[0.2, 0.4, 0.2]);
        assert!((d.truncation_bound() - 0.2).abs() < 1e-15);
        assert!(count_distribution(core::iter::empty(), 2).is_err());
    }
}
