use alloc::string::String;

/// Errors reported by the library.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A pulse could not be built from the given parameters.
    #[error("invalid pulse: {0}")]
    InvalidPulse(String),

    /// An argument violated an operation's precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Adaptive quadrature ran out of subdivisions before meeting its
    /// tolerance. The partial result is attached.
    #[error("quadrature subdivision limit reached (partial value {value:e}, error {error:e})")]
    SubdivisionLimit {
        /// Best value obtained.
        value: f64,
        /// Error estimate of `value`.
        error: f64,
    },

    /// The adaptive ODE integrator could not make progress.
    #[error("ODE step size underflow at t = {t}")]
    StepSizeUnderflow {
        /// Time at which the step size collapsed.
        t: f64,
    },

    /// Simplex quadrature was asked for an unsupported dimension.
    #[error("simplex dimension {0} unsupported (1..=3)")]
    UnsupportedDimension(usize),

    /// An exclusive probability came out more negative than the quadrature
    /// error budget allows.
    #[error("P_{n} = {value:e} is below the tolerance -{tolerance:e}")]
    NegativeProbability {
        /// Photon number.
        n: usize,
        /// Offending value.
        value: f64,
        /// Accepted negativity.
        tolerance: f64,
    },

    /// A statistic is undefined for the given distribution (for example
    /// `g2[0]` when no photon is ever emitted).
    #[error("undefined statistic: {0}")]
    Undefined(&'static str),
}

/// Library result type.
pub type Result<T> = core::result::Result<T, Error>;
