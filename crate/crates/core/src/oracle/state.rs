use num_complex::Complex64;
#[allow(unused_imports)] // shadowed by inherent methods whenever std is linked
use num_traits::Float;

use crate::{Error, Result};

/// Possibly unnormalized pure state `g |g> + e |e>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoLevelState {
    /// Ground amplitude.
    pub g: Complex64,
    /// Excited amplitude.
    pub e: Complex64,
}

impl TwoLevelState {
    /// `|g>`.
    pub fn ground() -> Self {
        Self { g: Complex64::new(1.0, 0.0), e: Complex64::new(0.0, 0.0) }
    }

    /// `|e>`.
    pub fn excited() -> Self {
        Self { g: Complex64::new(0.0, 0.0), e: Complex64::new(1.0, 0.0) }
    }

    /// Squared norm.
    pub fn norm_sqr(&self) -> f64 {
        self.g.norm_sqr() + self.e.norm_sqr()
    }

    /// Excited population of the normalized state.
    pub fn excited_population(&self) -> f64 {
        self.e.norm_sqr() / self.norm_sqr()
    }

    /// Unit-norm copy.
    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm_sqr().sqrt();
        if !(n > 0.0) {
            return Err(Error::InvalidArgument("cannot normalize a zero state".into()));
        }
        Ok(Self { g: self.g / n, e: self.e / n })
    }

    pub(crate) fn to_real(self) -> [f64; 4] {
        [self.g.re, self.g.im, self.e.re, self.e.im]
    }

    pub(crate) fn from_real(y: &[f64; 4]) -> Self {
        Self { g: Complex64::new(y[0], y[1]), e: Complex64::new(y[2], y[3]) }
    }
}

/// Two-level density matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix2 {
    /// Ground population.
    pub gg: f64,
    /// Excited population.
    pub ee: f64,
    /// Coherence `<g| rho |e>`; `<e| rho |g>` is its conjugate.
    pub ge: Complex64,
}

impl DensityMatrix2 {
    /// `|g><g|`.
    pub fn ground() -> Self {
        Self { gg: 1.0, ee: 0.0, ge: Complex64::new(0.0, 0.0) }
    }

    /// `|e><e|`.
    pub fn excited() -> Self {
        Self { gg: 0.0, ee: 1.0, ge: Complex64::new(0.0, 0.0) }
    }

    /// `|psi><psi| / <psi|psi>`.
    pub fn from_state(psi: &TwoLevelState) -> Result<Self> {
        let s = psi.normalized()?;
        Ok(Self { gg: s.g.norm_sqr(), ee: s.e.norm_sqr(), ge: s.g * s.e.conj() })
    }

    /// `<e| rho |g>`.
    pub fn eg(&self) -> Complex64 {
        self.ge.conj()
    }

    /// Trace.
    pub fn trace(&self) -> f64 {
        self.gg + self.ee
    }

    /// Eigenvalues, ascending.
    pub fn eigenvalues(&self) -> [f64; 2] {
        let mean = 0.5 * (self.gg + self.ee);
        let half_gap = (0.25 * (self.gg - self.ee).powi(2) + self.ge.norm_sqr()).sqrt();
        [mean - half_gap, mean + half_gap]
    }

    pub(crate) fn to_real(self) -> [f64; 4] {
        [self.gg, self.ee, self.ge.re, self.ge.im]
    }

    pub(crate) fn from_real(y: &[f64; 4]) -> Self {
        Self { gg: y[0], ee: y[1], ge: Complex64::new(y[2], y[3]) }
    }
}
