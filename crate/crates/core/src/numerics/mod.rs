//! Numerical kernels shared by the analytic model and the exact oracle:
//! adaptive Gauss-Kronrod quadrature (plain and over ordered simplices),
//! explicit Runge-Kutta integration with dense output, and seeded
//! counter-based random streams.

mod ode;
mod quadrature;
mod rng;

pub use ode::{integrate_ode, OdeConfig, OdeMethod, OdeSolution};
pub use quadrature::{
    integrate_1d, integrate_breakpoints, integrate_simplex, Estimate, QuadratureConfig,
};
pub use rng::RandomStream;
pub(crate) use quadrature::panel_points;
