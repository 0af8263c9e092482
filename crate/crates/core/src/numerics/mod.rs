//! Quadrature rules and small numeric helpers.
//!
//! Nothing in here knows about stable processes. The rules work for real and
//! complex integrands through the [`Scalar`] trait.

mod gamma;
mod grid;
mod oscillatory;
mod quadrature;

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub use gamma::gamma;
pub use grid::{LogGrid, LogGridSpec};
pub(crate) use grid::PowerTail;
pub use oscillatory::integrate_oscillatory_decaying;
pub use quadrature::{
    exp_sinh, gauss_kronrod, integrate_finite, integrate_semi_infinite, tanh_sinh,
};

/// Absolute tolerance used when a caller does not pick one.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Field-like values a quadrature rule can accumulate.
pub trait Scalar:
    Copy
    + Debug
    + Default
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Mul<f64, Output = Self>
{
    fn magnitude(self) -> f64;
    fn finite(self) -> bool;
    fn from_real(x: f64) -> Self;
}

impl Scalar for f64 {
    fn magnitude(self) -> f64 {
        self.abs()
    }
    fn finite(self) -> bool {
        self.is_finite()
    }
    fn from_real(x: f64) -> Self {
        x
    }
}

impl Scalar for Complex64 {
    fn magnitude(self) -> f64 {
        self.norm()
    }
    fn finite(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
    fn from_real(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
}

/// Value of an integral with an a-posteriori error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureResult<T = f64> {
    pub value: T,
    pub abs_error_estimate: f64,
    pub converged: bool,
    pub evaluations: usize,
}

impl<T: Scalar> QuadratureResult<T> {
    /// Turns a non-converged result into [`Error::NonConvergence`].
    pub fn into_result(self, what: &str) -> Result<T> {
        if self.converged && self.value.finite() {
            Ok(self.value)
        } else {
            Err(Error::NonConvergence {
                what: what.to_string(),
                estimate: self.value.magnitude(),
                error: self.abs_error_estimate,
            })
        }
    }

    pub(crate) fn combine(self, other: Self) -> Self {
        QuadratureResult {
            value: self.value + other.value,
            abs_error_estimate: self.abs_error_estimate + other.abs_error_estimate,
            converged: self.converged && other.converged,
            evaluations: self.evaluations + other.evaluations,
        }
    }
}

/// Tail behaviour of an integrand on (0, ∞).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Decay {
    /// |f(x)| ≲ e^{-rate·x}
    Exponential(f64),
    /// |f(x)| ≲ x^{exponent}; needs exponent < -1
    Power(f64),
    SuperExponential,
}

/// What a caller knows about an integrand on (0, ∞).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrandProfile {
    pub decay: Decay,
    /// Angular frequency of a bounded oscillating factor.
    pub oscillation: Option<f64>,
    /// Exponent s of an x^s behaviour at the origin.
    pub endpoint_singularity: Option<f64>,
}

impl IntegrandProfile {
    pub fn exponential(rate: f64) -> Self {
        Self::new(Decay::Exponential(rate))
    }

    pub fn power(exponent: f64) -> Self {
        Self::new(Decay::Power(exponent))
    }

    pub fn super_exponential() -> Self {
        Self::new(Decay::SuperExponential)
    }

    fn new(decay: Decay) -> Self {
        IntegrandProfile {
            decay,
            oscillation: None,
            endpoint_singularity: None,
        }
    }

    pub fn with_oscillation(mut self, frequency: f64) -> Self {
        self.oscillation = Some(frequency);
        self
    }

    pub fn with_endpoint_singularity(mut self, exponent: f64) -> Self {
        self.endpoint_singularity = Some(exponent);
        self
    }

    pub fn validate(&self) -> Result<()> {
        match self.decay {
            Decay::Power(p) if !(p < -1.0) => {
                return Err(Error::NotIntegrable(format!(
                    "power decay x^{p} is not integrable at infinity"
                )))
            }
            Decay::Exponential(r) if !(r > 0.0) => {
                return Err(Error::NotIntegrable(format!(
                    "exponential decay rate {r} must be positive"
                )))
            }
            _ => {}
        }
        if let Some(s) = self.endpoint_singularity {
            if !(s > -1.0) {
                return Err(Error::NotIntegrable(format!(
                    "x^{s} is not integrable at the origin"
                )));
            }
        }
        if let Some(w) = self.oscillation {
            if !(w >= 0.0) || !w.is_finite() {
                return Err(Error::domain(format!("oscillation frequency {w} must be ≥ 0")));
            }
        }
        Ok(())
    }

    /// Natural length scale of the integrand.
    pub(crate) fn scale(&self) -> f64 {
        match self.decay {
            Decay::Exponential(rate) => (1.0 / rate).clamp(1e-6, 1e6),
            _ => 1.0,
        }
    }
}

/// ln(2 sin(π z)) for complex z, stable for large |Im z|.
pub fn ln_two_sin_pi(z: Complex64) -> Complex64 {
    use std::f64::consts::PI;
    let i = Complex64::i();
    if z.im > 15.0 {
        // 2 sin(πz) = i e^{-iπz} (1 - e^{2iπz})
        i.ln() - i * PI * z + (1.0 - (2.0 * i * PI * z).exp()).ln()
    } else if z.im < -15.0 {
        // 2 sin(πz) = -i e^{iπz} (1 - e^{-2iπz})
        (-i).ln() + i * PI * z + (1.0 - (-2.0 * i * PI * z).exp()).ln()
    } else {
        (2.0 * sin_pi(z)).ln()
    }
}

/// sin(π z) with exact zeros at the integers.
pub fn sin_pi(z: Complex64) -> Complex64 {
    use std::f64::consts::PI;
    // reduce the real part to [-1, 1) to keep sin accurate near integers
    let n = (z.re / 2.0).round() * 2.0;
    let r = z.re - n;
    if z.im == 0.0 && r.fract() == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    (Complex64::new(r, z.im) * PI).sin()
}
