//! Spectral theory of stable Lévy processes killed on leaving the half-line.
//!
//! The crate evaluates the double sine function, the Wiener–Hopf factors of a
//! stable process, the eigenfunctions F and co-eigenfunctions F̂ of the killed
//! semigroup, and the spectral representations of survival probabilities,
//! transition densities and the transform pair Π, Π̂. A Monte Carlo path
//! simulator serves as an independent check.

// `!(x > 0.0)` is used on purpose: it rejects NaN along with the rest
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod eigenfunctions;
pub mod error;
pub mod numerics;
pub mod oracle;
pub mod special_functions;
pub mod spectral;
pub mod stable_model;
pub mod wiener_hopf;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use numerics::{IntegrandProfile, QuadratureResult};
pub use special_functions::{S2Evaluator, SurfacePoint};
pub use spectral::{SpectralConfig, SpectralModel, TestFunction};
pub use stable_model::StableParams;
pub use eigenfunctions::{Direction, EigenFn};
pub use wiener_hopf::{Extremum, SupDensity};
