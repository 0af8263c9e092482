//! Parameters, characteristic exponent, Lévy density and sampling of a
//! strictly stable process in the (α, ρ) parametrization.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Exp1, Open01};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};

/// Tolerance used to recognise α = 2 and the one-sided boundaries.
const BOUNDARY_TOL: f64 = 1e-12;

/// Which one-sided boundary of the admissible set a parameter pair sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OneSidedSide {
    /// αρ = 1: no positive jumps.
    SpectrallyNegative,
    /// αρ̂ = 1: no negative jumps.
    SpectrallyPositive,
}

impl OneSidedSide {
    fn flip(self) -> Self {
        match self {
            OneSidedSide::SpectrallyNegative => OneSidedSide::SpectrallyPositive,
            OneSidedSide::SpectrallyPositive => OneSidedSide::SpectrallyNegative,
        }
    }
}

/// Marker carried by parameters built through [`StableParams::one_sided`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OneSidedMode {
    pub side: OneSidedSide,
}

/// Stability index α and positivity parameter ρ = P(X_t > 0).
///
/// ρ and ρ̂ = 1 − ρ are stored separately so that `dual` is an exact involution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StableParams {
    alpha: f64,
    rho: f64,
    rho_hat: f64,
    one_sided: Option<OneSidedMode>,
}

impl StableParams {
    /// Parameters from the admissible set: α ∈ (0,1] with ρ ∈ (0,1), or
    /// α ∈ (1,2] with 1 − 1/α < ρ < 1/α. For α = 2 this forces ρ = 1/2.
    pub fn new(alpha: f64, rho: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 2.0) {
            return Err(Error::domain(format!("alpha = {alpha} is outside (0, 2]")));
        }
        if !(rho > 0.0 && rho < 1.0) {
            return Err(Error::domain(format!("rho = {rho} is outside (0, 1)")));
        }
        if alpha == 2.0 {
            if (rho - 0.5).abs() > BOUNDARY_TOL {
                return Err(Error::domain(format!("alpha = 2 requires rho = 1/2, got {rho}")));
            }
            return Ok(Self::raw(2.0, 0.5, 0.5, None));
        }
        if alpha > 1.0 && !(rho > 1.0 - 1.0 / alpha && rho < 1.0 / alpha) {
            return Err(Error::domain(format!(
                "for alpha = {alpha} rho must lie in ({}, {}), got {rho}",
                1.0 - 1.0 / alpha,
                1.0 / alpha
            )));
        }
        Ok(Self::raw(alpha, rho, 1.0 - rho, None))
    }

    /// Spectrally one-sided process with α ∈ (1, 2).
    pub fn one_sided(alpha: f64, side: OneSidedSide) -> Result<Self> {
        if !(alpha > 1.0 && alpha < 2.0) {
            return Err(Error::domain(format!(
                "one-sided mode needs alpha in (1, 2), got {alpha}"
            )));
        }
        let r = 1.0 / alpha;
        let (rho, rho_hat) = match side {
            OneSidedSide::SpectrallyNegative => (r, 1.0 - r),
            OneSidedSide::SpectrallyPositive => (1.0 - r, r),
        };
        Ok(Self::raw(alpha, rho, rho_hat, Some(OneSidedMode { side })))
    }

    /// One-sided parameters given as (α, ρ) with αρ = 1 or αρ̂ = 1.
    pub fn one_sided_from_rho(alpha: f64, rho: f64) -> Result<Self> {
        if (alpha * rho - 1.0).abs() <= 1e-9 {
            Self::one_sided(alpha, OneSidedSide::SpectrallyNegative)
        } else if (alpha * (1.0 - rho) - 1.0).abs() <= 1e-9 {
            Self::one_sided(alpha, OneSidedSide::SpectrallyPositive)
        } else {
            Err(Error::domain(format!(
                "(alpha, rho) = ({alpha}, {rho}) is not on a one-sided boundary"
            )))
        }
    }

    fn raw(alpha: f64, rho: f64, rho_hat: f64, one_sided: Option<OneSidedMode>) -> Self {
        StableParams {
            alpha,
            rho,
            rho_hat,
            one_sided,
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn rho_hat(&self) -> f64 {
        self.rho_hat
    }

    pub fn one_sided_mode(&self) -> Option<OneSidedMode> {
        self.one_sided
    }

    pub fn is_one_sided(&self) -> bool {
        self.one_sided.is_some()
    }

    pub fn is_symmetric(&self) -> bool {
        self.rho == 0.5
    }

    /// The parameters of X̂ = −X.
    pub fn dual(&self) -> Self {
        Self::raw(
            self.alpha,
            self.rho_hat,
            self.rho,
            self.one_sided.map(|m| OneSidedMode { side: m.side.flip() }),
        )
    }

    /// Γ(1+α) sin(παρ)/π, the Lévy density constant on x > 0.
    pub fn c_plus(&self) -> f64 {
        self.jump_constant(self.rho, OneSidedSide::SpectrallyNegative)
    }

    /// Γ(1+α) sin(παρ̂)/π, the constant on x < 0.
    pub fn c_minus(&self) -> f64 {
        self.jump_constant(self.rho_hat, OneSidedSide::SpectrallyPositive)
    }

    /// Γ(1+α) sin(πα r)/π, exactly zero on the side without jumps.
    fn jump_constant(&self, r: f64, silent: OneSidedSide) -> f64 {
        if self.one_sided.map(|m| m.side) == Some(silent) {
            return 0.0;
        }
        (gamma(1.0 + self.alpha) * (PI * self.alpha * r).sin() / PI).max(0.0)
    }
}

impl fmt::Display for StableParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "alpha={} rho={}", self.alpha, self.rho)?;
        if let Some(m) = self.one_sided {
            write!(f, " ({:?})", m.side)?;
        }
        Ok(())
    }
}

/// Ψ(z) = |z|^α e^{πiα(1/2−ρ) sign z}, so that E e^{izX_1} = e^{−Ψ(z)}.
pub fn psi(params: &StableParams, z: f64) -> Complex64 {
    if z == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let phase = PI * params.alpha * (0.5 - params.rho) * z.signum();
    Complex64::from_polar(z.abs().powf(params.alpha), phase)
}

/// Density of the Lévy measure, c₊|x|^{−1−α} on x > 0 and c₋|x|^{−1−α} on x < 0.
pub fn levy_density(params: &StableParams, x: f64) -> Result<f64> {
    if x == 0.0 || !x.is_finite() {
        return Err(Error::domain("the Lévy density is defined for finite x ≠ 0"));
    }
    if params.alpha == 2.0 {
        return Err(Error::domain("alpha = 2 has no jumps"));
    }
    if params.alpha == 1.0 && params.rho != 0.5 {
        return Err(Error::domain(
            "alpha = 1 with rho ≠ 1/2 is a Cauchy process with drift; the power-law form does not apply",
        ));
    }
    let c = if x > 0.0 { params.c_plus() } else { params.c_minus() };
    Ok(c * x.abs().powf(-1.0 - params.alpha))
}

/// A Doney class C_{k,l}: αρ = l − kα.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DoneyClass {
    pub k: i64,
    pub l: i64,
    pub residual: f64,
}

/// Default tolerance for [`detect_doney`].
pub const DONEY_TOL: f64 = 1e-12;

/// Finds (k, l) with |k| ≤ k_max minimising |αρ − l + kα|, if within `tol`.
pub fn detect_doney(params: &StableParams, tol: f64, k_max: i64) -> Option<DoneyClass> {
    let ar = params.alpha * params.rho;
    let mut best: Option<DoneyClass> = None;
    // visit k in order of increasing |k| so that ties keep the smallest |k|
    let ks = std::iter::once(0).chain((1..=k_max.max(0)).flat_map(|k| [k, -k]));
    for k in ks {
        let target = ar + k as f64 * params.alpha;
        let l_round = target.round();
        // equal residuals can only happen at a half-integer target; prefer smaller |l|
        for l in [l_round, l_round - l_round.signum()] {
            let residual = (target - l).abs();
            let cand = DoneyClass {
                k,
                l: l as i64,
                residual,
            };
            best = match best {
                None => Some(cand),
                Some(b) => {
                    let better = residual < b.residual
                        || (residual == b.residual
                            && (k.abs(), cand.l.abs()) < (b.k.abs(), b.l.abs()));
                    Some(if better { cand } else { b })
                }
            };
        }
    }
    best.filter(|b| b.residual <= tol)
}

/// One draw of X_t started from 0.
///
/// Chambers–Mallows–Stuck in Zolotarev's form with θ = 2ρ − 1 for α ≠ 1; for
/// α = 1 the Cauchy representation X_t = sin(πρ) Z_t − cos(πρ) t.
pub fn sample_increment<R: Rng + ?Sized>(params: &StableParams, t: f64, rng: &mut R) -> f64 {
    let a = params.alpha;
    let u = PI * (rng.sample::<f64, _>(Open01) - 0.5);
    if a == 1.0 {
        let cauchy = u.tan();
        return (PI * params.rho).sin() * t * cauchy - (PI * params.rho).cos() * t;
    }
    let w: f64 = rng.sample(Exp1);
    let shift = 0.5 * PI * (2.0 * params.rho - 1.0);
    let au = a * (u + shift);
    let x = au.sin() / u.cos().powf(1.0 / a) * ((u - au).cos() / w).powf((1.0 - a) / a);
    t.powf(1.0 / a) * x
}

/// A real number written as a decimal or as a ratio "p/q".
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rational(pub f64);

impl FromStr for Rational {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let parse = |t: &str| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::domain(format!("cannot parse {t:?} as a number")))
        };
        let v = match s.split_once('/') {
            Some((p, q)) => {
                let q = parse(q)?;
                if q == 0.0 {
                    return Err(Error::DivisionByZero(format!("zero denominator in {s:?}")));
                }
                parse(p)? / q
            }
            None => parse(s)?,
        };
        if !v.is_finite() {
            return Err(Error::domain(format!("{s:?} is not finite")));
        }
        Ok(Rational(v))
    }
}

/// Parses "0.55" or "3/7".
pub fn parse_real(s: &str) -> Result<f64> {
    s.parse::<Rational>().map(|r| r.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn admissibility() {
        assert!(StableParams::new(1.5, 0.6).is_ok());
        assert!(matches!(StableParams::new(1.5, 0.7), Err(Error::Domain(_))));
        assert!(StableParams::new(0.5, 0.95).is_ok());
        assert!(StableParams::new(2.0, 0.5).is_ok());
        assert!(StableParams::new(2.0, 0.6).is_err());
        assert!(StableParams::new(1.5, 2.0 / 3.0).is_err());
        let p = StableParams::one_sided(1.5, OneSidedSide::SpectrallyNegative).unwrap();
        assert_eq!(p.alpha() * p.rho(), 1.0);
        assert_eq!(p.c_plus(), 0.0);
        assert!(StableParams::one_sided(0.9, OneSidedSide::SpectrallyNegative).is_err());
    }

    #[test]
    fn psi_examples() {
        let bm = StableParams::new(2.0, 0.5).unwrap();
        assert!((psi(&bm, 3.0) - 9.0).norm() < 1e-14);
        let cauchy = StableParams::new(1.0, 0.3).unwrap();
        for &z in &[-2.0, 0.7] {
            let expect = Complex64::new((PI * 0.3).sin() * f64::abs(z), (PI * 0.3).cos() * z);
            assert!((psi(&cauchy, z) - expect).norm() < 1e-14);
        }
        let p = StableParams::new(1.5, 0.6).unwrap();
        assert!((psi(&p, 1.0) - Complex64::from_polar(1.0, -0.15 * PI)).norm() < 1e-15);
        assert_eq!(psi(&p, 0.0), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn levy_density_examples() {
        let p = StableParams::new(1.5, 0.6).unwrap();
        let expect = gamma(2.5) * (0.9 * PI).sin() / PI * 2f64.powf(-2.5);
        assert!((levy_density(&p, 2.0).unwrap() - expect).abs() < 1e-15);
        let s = StableParams::new(0.8, 0.5).unwrap();
        assert_eq!(levy_density(&s, 1.3).unwrap(), levy_density(&s, -1.3).unwrap());
        assert!(levy_density(&p, 0.0).is_err());
        assert!(levy_density(&StableParams::new(1.0, 0.7).unwrap(), 1.0).is_err());
        // tail mass: ∫_{|x|>1} ν = (c₊ + c₋)/α, against a quadrature of the density
        let tail = crate::numerics::integrate_semi_infinite(
            |y: f64| levy_density(&p, 1.0 + y).unwrap() + levy_density(&p, -1.0 - y).unwrap(),
            crate::numerics::IntegrandProfile::power(-2.5),
            1e-12,
        )
        .unwrap();
        assert!((tail.value - (p.c_plus() + p.c_minus()) / 1.5).abs() < 1e-9);
    }

    #[test]
    fn doney_detection() {
        let p = StableParams::new(1.4, parse_real("3/7").unwrap()).unwrap();
        let d = detect_doney(&p, DONEY_TOL, 5).unwrap();
        assert_eq!((d.k, d.l), (1, 2));
        let n = StableParams::one_sided(1.5, OneSidedSide::SpectrallyNegative).unwrap();
        let d = detect_doney(&n, DONEY_TOL, 5).unwrap();
        assert_eq!((d.k, d.l), (0, 1));
        let g = StableParams::new(std::f64::consts::FRAC_1_SQRT_2, 0.37).unwrap();
        assert!(detect_doney(&g, 1e-9, 5).is_none());
    }

    #[test]
    fn rational_parsing() {
        assert_eq!(parse_real("3/7").unwrap(), 3.0 / 7.0);
        assert_eq!(parse_real(" 0.55 ").unwrap(), 0.55);
        assert!(parse_real("1/0").is_err());
        assert!(parse_real("abc").is_err());
    }

    #[test]
    fn brownian_variance() {
        let p = StableParams::new(2.0, 0.5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 200_000;
        let v: f64 = (0..n).map(|_| sample_increment(&p, 1.0, &mut rng).powi(2)).sum::<f64>() / n as f64;
        // variance 2, standard error of the mean of squares ≈ 2√2/√n
        assert!((v - 2.0).abs() < 4.0 * 2.0 * 2f64.sqrt() / (n as f64).sqrt(), "{v}");
    }

    #[test]
    fn positivity_matches_rho() {
        for &(a, r) in &[(1.3, 0.55), (0.7, 0.2), (1.0, 0.7), (1.8, 0.5)] {
            let p = StableParams::new(a, r).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(11);
            let n = 200_000;
            let pos = (0..n).filter(|_| sample_increment(&p, 1.0, &mut rng) > 0.0).count();
            let est = pos as f64 / n as f64;
            let se = (r * (1.0 - r) / n as f64).sqrt();
            assert!((est - r).abs() < 4.0 * se, "({a},{r}): {est}");
        }
    }

    #[test]
    fn cauchy_case_against_cdf() {
        // X_1 + cos(0.7π) = sin(0.7π)·Cauchy; Kolmogorov–Smirnov distance
        let r = 0.7;
        let p = StableParams::new(1.0, r).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 100_000;
        let mut xs: Vec<f64> = (0..n)
            .map(|_| (sample_increment(&p, 1.0, &mut rng) + (PI * r).cos()) / (PI * r).sin())
            .collect();
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let d = xs
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let f = 0.5 + x.atan() / PI;
                (f - i as f64 / n as f64).abs().max((f - (i + 1) as f64 / n as f64).abs())
            })
            .fold(0.0, f64::max);
        // 1% critical value 1.63/√n
        assert!(d < 1.63 / (n as f64).sqrt(), "KS distance {d}");
    }

    #[test]
    fn scaling_two_sample_ks() {
        let p = StableParams::new(1.5, 0.6).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 100_000;
        let s = 2f64.powf(1.0 / 1.5);
        let mut a: Vec<f64> = (0..n).map(|_| sample_increment(&p, 2.0, &mut rng) / s).collect();
        let mut b: Vec<f64> = (0..n).map(|_| sample_increment(&p, 1.0, &mut rng)).collect();
        a.sort_by(|x, y| x.partial_cmp(y).unwrap());
        b.sort_by(|x, y| x.partial_cmp(y).unwrap());
        let (mut i, mut j, mut d) = (0, 0, 0.0f64);
        while i < n && j < n {
            if a[i] <= b[j] {
                i += 1;
            } else {
                j += 1;
            }
            d = d.max((i as f64 - j as f64).abs() / n as f64);
        }
        // two-sample critical value at 1%: 1.63·√(2/n)
        assert!(d < 1.63 * (2.0 / n as f64).sqrt(), "KS distance {d}");
    }

    proptest! {
        #[test]
        fn dual_is_an_involution(a in 0.05..2.0f64, t in 0.01..0.99f64) {
            let lo = if a > 1.0 { 1.0 - 1.0 / a } else { 0.0 };
            let hi = if a > 1.0 { 1.0 / a } else { 1.0 };
            let rho = lo + (hi - lo) * t;
            let p = StableParams::new(a, rho).unwrap();
            prop_assert_eq!(p.dual().dual(), p);
            prop_assert!(StableParams::new(a, p.dual().rho()).is_ok());
            prop_assert_eq!(p.dual().c_plus(), p.c_minus());
        }

        #[test]
        fn psi_is_hermitian(a in 0.05..2.0f64, t in 0.01..0.99f64, z in -50.0..50.0f64) {
            let lo = if a > 1.0 { 1.0 - 1.0 / a } else { 0.0 };
            let hi = if a > 1.0 { 1.0 / a } else { 1.0 };
            let p = StableParams::new(a, lo + (hi - lo) * t).unwrap();
            prop_assert!((psi(&p, z).conj() - psi(&p, -z)).norm() <= 1e-12 * psi(&p, z).norm().max(1.0));
        }
    }
}
