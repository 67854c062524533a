//! Approximation-free reference computations.
//!
//! Everything here integrates the two-level dynamics directly: the
//! unnormalized no-jump evolution, whose squared norm is the probability of
//! no emission so far, the Lindblad master equation, and jump trajectories
//! sampled from the no-jump survival. The drive is real (laser phase zero),
//! so amplitudes evolved from the ground state stay real.

mod conditional;
mod correlation;
mod density;
mod master;
mod state;
mod trajectories;

pub use conditional::{propagate_conditional, NoJumpPath};
pub use correlation::{g2_two_time, two_time_grid, TwoTimeCorrelation};
pub use density::{exact_density_fn, exact_distribution, lambda_survival, RepumpProbability};
pub use master::{
    master_equation_rho, number_resolved_distribution, photon_moments, MasterSolution, PhotonMoments,
};
pub use state::{DensityMatrix2, TwoLevelState};
pub use trajectories::{
    count_distribution, mean_and_standard_error, sample_trajectories, TrajectoryRecord, TrajectorySampler,
};

use crate::numerics::{OdeConfig, QuadratureConfig};

/// Tolerances for the oracle computations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleConfig {
    /// ODE settings for every propagation.
    pub ode: OdeConfig,
    /// Outermost quadrature settings; nested levels tighten by ten.
    pub quadrature: QuadratureConfig,
    /// Post-pulse horizon for trajectories, in units of `1/gamma`.
    pub horizon_lifetimes: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            ode: OdeConfig::default(),
            quadrature: QuadratureConfig::with_rel_tol(1e-7),
            horizon_lifetimes: 20.0,
        }
    }
}
