//! Fixtures shared by the criterion benches.

use stable_spectral::StableParams;

/// (α, ρ) pairs covering α < 1, the symmetric case and an asymmetric α > 1.
pub const CASES: [(f64, f64); 3] = [(0.8, 0.5), (1.5, 0.5), (1.5, 0.55)];

pub fn params(alpha: f64, rho: f64) -> StableParams {
    StableParams::new(alpha, rho).expect("bench parameters are admissible")
}

pub fn label(alpha: f64, rho: f64) -> String {
    format!("a{alpha}_r{rho}")
}
