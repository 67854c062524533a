//! Photon-emission statistics of a pulse-driven two-level system that decays
//! spontaneously.
//!
//! Two independent backends compute the same observables:
//!
//! * [`analytic`] evaluates the short-pulse counting hierarchy, where every
//!   emission during the pulse restarts the Rabi rotation from the ground
//!   state and only the last emission of a sequence happens after the pulse.
//! * [`oracle`] integrates the full no-jump (conditional) dynamics, the
//!   master equation and sampled jump trajectories without any short-pulse
//!   approximation.
//!
//! [`statistics`] turns photocount distributions into mean photon number,
//! pulse-wise second-order coherence, relative variance and purities.
//!
//! Times are measured in units of `1/gamma` throughout the examples, but the
//! decay rate is carried explicitly in [`SystemParams`].
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]
#![warn(missing_docs, rust_2018_idioms)]
// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod analytic;
pub mod counting;
mod error;
pub mod numerics;
pub mod oracle;
pub mod pulse;
pub mod statistics;

pub use analytic::{SquareClosedForm, ShortPulseModel, SystemParams};
pub use counting::{Axis, DensitySample, PhotocountDistribution, Provenance};
pub use error::{Error, Result};
pub use numerics::{Estimate, OdeConfig, OdeMethod, QuadratureConfig, RandomStream};
pub use pulse::{PulseKind, PulseShape};
pub use statistics::EmissionStatistics;
