//! Eigenfunctions F and co-eigenfunctions F̂ of the killed semigroup, the
//! completely monotone part G, their Laplace and Mellin transforms, and the
//! finite-product forms available in Doney classes and in the one-sided case.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{
    gamma, integrate_oscillatory_decaying, integrate_semi_infinite, sin_pi, tanh_sinh,
    IntegrandProfile, LogGrid, LogGridSpec, PowerTail, QuadratureResult,
};
use crate::special_functions::{q_pochhammer, S2Evaluator, SurfacePoint};
use crate::stable_model::{detect_doney, DoneyClass, StableParams, DONEY_TOL};
use crate::wiener_hopf::{RotatedSupDensity, V_CAP};

const GRID_DIGITS: f64 = 15.0;

/// F (primal) or F̂ (dual, ρ and ρ̂ exchanged).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    Primal,
    Dual,
}

/// F(x) = e^{x cos πρ} sin(x sin πρ + πρ(1−αρ̂)/2) + c G(x), c = √α S₂(−αρ̂)/(4π).
///
/// G is tabulated once on a log grid, so each evaluation is a single pass
/// over a few thousand nodes.
#[derive(Debug, Clone)]
pub struct EigenFn {
    params: StableParams,
    direction: Direction,
    /// ρ as seen by the formula: ρ̂ for the dual direction.
    rho: f64,
    coef: f64,
    phase: f64,
    rot: Complex64,
    grid: LogGrid<f64>,
    tail: PowerTail<f64>,
    g0: f64,
    s2: S2Evaluator,
}

impl EigenFn {
    pub fn new(params: &StableParams, direction: Direction) -> Result<Self> {
        let eff = match direction {
            Direction::Primal => *params,
            Direction::Dual => params.dual(),
        };
        let (a, r, rh) = (eff.alpha(), eff.rho(), eff.rho_hat());
        let s2 = S2Evaluator::new(a)?;
        let coef = a.sqrt() / (4.0 * PI) * s2.s2_real(-a * rh)?;
        let (grid, spec) = g_grid(&s2, &eff)?;
        let tail = PowerTail::fit(&grid, spec.h, 1.0 + a * rh);
        let g0 = grid.laplace(0.0, 0) + tail.laplace(0.0, 0);
        Ok(EigenFn {
            params: *params,
            direction,
            rho: r,
            coef,
            phase: PI * r * (1.0 - a * rh) / 2.0,
            rot: Complex64::from_polar(1.0, PI * r),
            grid,
            tail,
            g0,
            s2,
        })
    }

    pub fn params(&self) -> &StableParams {
        &self.params
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    fn alpha(&self) -> f64 {
        self.params.alpha()
    }

    fn rho_hat(&self) -> f64 {
        1.0 - self.rho
    }

    /// √α S₂(−αρ̂)/(4π), the weight of G in F.
    pub fn g_coefficient(&self) -> f64 {
        self.coef
    }

    /// e^{x e^{iπρ} + iφ₀}; F's oscillating term is its imaginary part.
    fn wave(&self, x: f64) -> Complex64 {
        (self.rot * x + Complex64::new(0.0, self.phase)).exp()
    }

    /// The oscillating term e^{x cos πρ} sin(x sin πρ + φ₀).
    pub fn oscillatory(&self, x: f64) -> f64 {
        self.wave(x).im
    }

    /// G(x) for x ≥ 0.
    pub fn g(&self, x: f64) -> f64 {
        if x == 0.0 {
            return self.g0;
        }
        self.grid.laplace(x, 0) + self.tail.laplace(x, 0)
    }

    /// G′(x) for x > 0, differentiating under the integral.
    pub fn g_prime(&self, x: f64) -> f64 {
        self.grid.laplace(x, 1) + self.tail.laplace(x, 1)
    }

    /// F(x).
    pub fn f(&self, x: f64) -> f64 {
        self.oscillatory(x) + self.coef * self.g(x)
    }

    /// F′(x).
    pub fn f_prime(&self, x: f64) -> f64 {
        (self.rot * self.wave(x)).im + self.coef * self.g_prime(x)
    }

    /// ρ as seen by the formula (ρ̂ for F̂).
    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// The wave e^{w e^{iπρ} + iφ₀} at complex w.
    pub fn wave_at(&self, w: Complex64) -> Complex64 {
        (self.rot * w + Complex64::new(0.0, self.phase)).exp()
    }

    /// G continued to Re w > 0.
    ///
    /// The power tail beyond the grid is dropped; it weighs about 1e−16.
    pub fn g_at(&self, w: Complex64) -> Complex64 {
        self.grid.integrate_with(|u| (-w * u).exp())
    }

    /// F continued to Re w > 0.
    pub fn f_at(&self, w: Complex64) -> Complex64 {
        let wave = self.wave_at(w);
        let mirror = (self.rot.conj() * w - Complex64::new(0.0, self.phase)).exp();
        (wave - mirror) / (2.0 * Complex64::i()) + self.coef * self.g_at(w)
    }

    /// F(x), switching to [`EigenFn::f_increment`] below x = 1.
    pub fn f_stable(&self, x: f64) -> f64 {
        if x < 1.0 {
            self.f_increment(x)
        } else {
            self.f(x)
        }
    }

    /// F(x) − F(0⁺) assembled from increments, without the cancellation
    /// between the two terms that plagues F itself near the origin.
    pub fn f_increment(&self, x: f64) -> f64 {
        let dk = (Complex64::new(0.0, self.phase).exp() * expm1(self.rot * x)).im;
        let dg: f64 = self
            .grid
            .nodes()
            .map(|(u, w)| w * (-x * u).exp_m1())
            .sum::<f64>()
            + self.tail.increment(x);
        dk + self.coef * dg
    }

    /// F(0⁺) = sin φ₀ + c G(0), which vanishes analytically.
    pub fn f_at_origin(&self) -> f64 {
        self.phase.sin() + self.coef * self.g0
    }

    /// Closed-form ∫₀^∞ e^{−zx} F(x) dx for Re z > max(0, cos πρ).
    pub fn laplace(&self, z: Complex64) -> Result<Complex64> {
        let abscissa = (PI * self.rho).cos().max(0.0);
        if !(z.re > abscissa) {
            return Err(Error::domain(format!(
                "Re z = {} is left of the abscissa {abscissa}",
                z.re
            )));
        }
        let (a, rh) = (self.alpha(), self.rho_hat());
        let b = 1.0 + a / 2.0 + a * rh / 2.0;
        let front = a.sqrt() / 2.0 * self.s2.s2_real(a * self.rho)?;
        let point = SurfacePoint::from_complex(z)?;
        let pair = if z.im == 0.0 {
            Complex64::new(self.s2.abs_squared_on_ray(b, 0.0, z.re)?, 0.0)
        } else {
            self.s2.pair(b, point)?
        };
        Ok(front * point.powf(-a * rh / 2.0 - 0.5) * pair)
    }

    /// ∫₀^∞ e^{−zx} F(x) dx by quadrature.
    pub fn laplace_numeric(&self, z: Complex64, tol: f64) -> Result<Complex64> {
        let abscissa = (PI * self.rho).cos().max(0.0);
        if !(z.re > abscissa) {
            return Err(Error::domain(format!(
                "Re z = {} is left of the abscissa {abscissa}",
                z.re
            )));
        }
        let prof = IntegrandProfile::exponential(z.re - abscissa);
        let i = Complex64::i();
        let ph = Complex64::new(0.0, self.phase);
        // e^{−zx} times the oscillating term, with the exponents merged so
        // that a growing wave never meets an underflowing kernel
        let damped = |x: f64| {
            (((self.rot - z) * x + ph).exp() - ((self.rot.conj() - z) * x - ph).exp()) / (2.0 * i)
        };
        integrate_semi_infinite(|x| damped(x) + (-z * x).exp() * (self.coef * self.g(x)), prof, tol)?
            .into_result("Laplace transform of F")
    }

    fn check_mellin_strip(&self, z: Complex64) -> Result<()> {
        if self.rho < 0.5 {
            return Err(Error::domain(format!(
                "the Mellin transform of F needs ρ ≥ 1/2, got {}",
                self.rho
            )));
        }
        let lo = -self.alpha() * self.rho_hat();
        if !(z.re > lo && z.re < 0.0) {
            return Err(Error::domain(format!(
                "Re z = {} is outside the strip ({lo}, 0)",
                z.re
            )));
        }
        Ok(())
    }

    /// Closed-form ∫₀^∞ x^{z−1} F(x) dx = Γ(z) S₂(z) / (2 S₂(αρ̂ + z)).
    pub fn mellin(&self, z: Complex64) -> Result<Complex64> {
        self.check_mellin_strip(z)?;
        let a = self.alpha();
        Ok(gamma(z) * self.s2.s2(z)? / (2.0 * self.s2.s2(z + a * self.rho_hat())?))
    }

    /// ∫₀^∞ x^{z−1} F(x) dx by quadrature.
    ///
    /// Near the origin the integrand uses [`EigenFn::f_increment`]; the
    /// transform exists only because F(0⁺) = 0.
    pub fn mellin_numeric(&self, z: Complex64, tol: f64) -> Result<Complex64> {
        self.check_mellin_strip(z)?;
        let f = |x: f64| {
            let v = self.f_stable(x);
            if v == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            // x^{z−1} alone overflows at the innermost tanh-sinh nodes
            v.signum() * ((z - 1.0) * x.ln() + v.abs().ln()).exp()
        };
        let decay = -(PI * self.rho).cos();
        let freq = (PI * self.rho).sin();
        integrate_oscillatory_decaying(f, decay, freq, tol)?.into_result("Mellin transform of F")
    }
}

/// e^w − 1 for complex w, accurate for small |w|.
fn expm1(w: Complex64) -> Complex64 {
    let (s, c) = w.im.sin_cos();
    let cm1 = -2.0 * (0.5 * w.im).sin().powi(2);
    Complex64::new(w.re.exp_m1() * c + cm1, w.re.exp() * s)
}

/// The G integrand z^{αρ/2−1/2} |S₂(1+α+αρ̂/2 + iα ln z/2π)|².
pub fn g_integrand(s2: &S2Evaluator, p: &StableParams, z: f64) -> Result<f64> {
    let a = p.alpha();
    let b = 1.0 + a + a * p.rho_hat() / 2.0;
    Ok(z.powf(a * p.rho() / 2.0 - 0.5) * s2.abs_squared_on_ray(b, 0.0, z)?)
}

fn g_grid(s2: &S2Evaluator, p: &StableParams) -> Result<(LogGrid<f64>, LogGridSpec)> {
    let (a, rh) = (p.alpha(), p.rho_hat());
    // poles of the continued integrand sit at Im ln z = ±πρ̂ and ±(2π/α − πρ̂)
    let d = 0.8 * (PI * rh).min(2.0 * PI / a - PI * rh).min(0.5 * PI);
    // z g(z) ~ z^{α+1} at 0 and z^{−αρ̂} at ∞
    let spec = LogGridSpec::from_tails(a + 1.0, a * rh, d, GRID_DIGITS)?.cap_upper(V_CAP);
    Ok((LogGrid::build(spec, |z| g_integrand(s2, p, z))?, spec))
}

/// G(x) for one point; prefer [`EigenFn`] for repeated use.
pub fn g_func(params: &StableParams, x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::domain(format!("x = {x} must be ≥ 0")));
    }
    Ok(EigenFn::new(params, Direction::Primal)?.g(x))
}

/// F(x) for one point.
pub fn f_eigen(params: &StableParams, direction: Direction, x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::domain(format!("x = {x} must be positive")));
    }
    Ok(EigenFn::new(params, direction)?.f(x))
}

/// Closed-form Laplace transform of F.
pub fn laplace_f(params: &StableParams, direction: Direction, z: Complex64) -> Result<Complex64> {
    EigenFn::new(params, direction)?.laplace(z)
}

/// Closed-form Mellin transform of F.
pub fn mellin_f(params: &StableParams, direction: Direction, z: Complex64) -> Result<Complex64> {
    EigenFn::new(params, direction)?.mellin(z)
}

/// Finite-product forms of G, φ, and the Laplace and Mellin transforms of F
/// in a Doney class C_{k,l}, i.e. αρ = l − kα.
#[derive(Debug, Clone)]
pub struct DoneyForms {
    params: StableParams,
    class: DoneyClass,
    q: Complex64,
    q_tilde: Complex64,
    laplace_front: f64,
}

impl DoneyForms {
    pub fn new(params: &StableParams) -> Result<Self> {
        let class = detect_doney(params, DONEY_TOL, 50).ok_or_else(|| {
            Error::domain(format!("{params} is not in a Doney class"))
        })?;
        let a = params.alpha();
        let s2 = S2Evaluator::new(a)?;
        Ok(DoneyForms {
            params: *params,
            class,
            q: Complex64::from_polar(1.0, 2.0 * PI * a),
            q_tilde: Complex64::from_polar(1.0, -2.0 * PI / a),
            laplace_front: a.sqrt() / 2.0 * s2.s2_real(a * params.rho())?,
        })
    }

    pub fn class(&self) -> DoneyClass {
        self.class
    }

    fn sign(n: i64) -> f64 {
        if n.rem_euclid(2) == 0 {
            1.0
        } else {
            -1.0
        }
    }

    fn cis(t: f64) -> Complex64 {
        Complex64::from_polar(1.0, t)
    }

    /// The G integrand as a ratio of q-Pochhammer symbols; z = 1 is a
    /// removable 0·∞ point and must be avoided.
    pub fn g_integrand(&self, z: f64) -> Result<Complex64> {
        let (a, k, l) = (self.params.alpha(), self.class.k, self.class.l);
        let za = z.powf(a);
        let num = q_pochhammer(
            Self::sign(l) * za * Self::cis(PI * a * (k + 3) as f64),
            self.q,
            -k - 2,
        )?;
        let den = q_pochhammer(
            Self::sign(k + 1) * z * Self::cis(-PI * l as f64 / a),
            self.q_tilde,
            -l + 1,
        )?;
        finite_ratio("G integrand", za * num / den)
    }

    /// Laplace transform of F at real z > 0, z ≠ 1.
    pub fn laplace(&self, z: f64) -> Result<Complex64> {
        let (a, k, l) = (self.params.alpha(), self.class.k, self.class.l);
        let num = q_pochhammer(
            Self::sign(l) * z.powf(a) * Self::cis(PI * a * (k + 2) as f64),
            self.q,
            -k - 1,
        )?;
        let den = q_pochhammer(
            Self::sign(k) * z * Self::cis(-PI * l as f64 / a),
            self.q_tilde,
            -l + 1,
        )?;
        finite_ratio("Laplace transform", self.laplace_front * num / den)
    }

    /// φ(z) at real z > 0, z ≠ 1.
    pub fn phi(&self, z: f64) -> Result<Complex64> {
        let (a, k, l) = (self.params.alpha(), self.class.k, self.class.l);
        let num = q_pochhammer(
            Self::sign(l + 1) * z.powf(a) * Self::cis(PI * a * (1 - k) as f64),
            self.q,
            k,
        )?;
        let den = q_pochhammer(
            Self::sign(k - 1) * z * Self::cis(PI * (l - 1) as f64 / a),
            self.q_tilde,
            l,
        )?;
        finite_ratio("φ", num / den)
    }

    /// Mellin transform of F as a finite trigonometric product.
    pub fn mellin(&self, z: Complex64) -> Result<Complex64> {
        let (a, k, l) = (self.params.alpha(), self.class.k, self.class.l);
        let mut p = 0.5 * Self::sign((k + 1) * l) * gamma(z);
        if l > 0 {
            for j in 1..=(k + 1) {
                p *= 2.0 * sin_pi(z + (j - 1) as f64 * a);
            }
            for j in 1..=l {
                p /= nonzero(2.0 * sin_pi((z - j as f64) / a), "Mellin product")?;
            }
        } else {
            for j in 1..=(-l) {
                p *= 2.0 * sin_pi((z + (j - 1) as f64) / a);
            }
            for j in 1..=(k + 1).abs() {
                p /= nonzero(2.0 * sin_pi(z - j as f64 * a), "Mellin product")?;
            }
        }
        Ok(p)
    }

    /// G(x) from the finite-product integrand.
    pub fn g(&self, x: f64) -> Result<f64> {
        if !(x >= 0.0) {
            return Err(Error::domain(format!("x = {x} must be ≥ 0")));
        }
        let s2 = S2Evaluator::new(self.params.alpha())?;
        let (_, spec) = g_grid(&s2, &self.params)?;
        let grid = LogGrid::build(spec, |z| {
            let v = self.g_integrand(z)?;
            if v.im.abs() > 1e-9 * v.norm().max(1e-300) {
                return Err(Error::NonConvergence {
                    what: format!("imaginary part of the Doney G integrand at z = {z}"),
                    estimate: v.im,
                    error: 1e-9 * v.norm(),
                });
            }
            Ok(v.re)
        })?;
        let a = self.params.alpha();
        let tail = PowerTail::fit(&grid, spec.h, 1.0 + a * self.params.rho_hat());
        Ok(grid.laplace(x, 0) + tail.laplace(x, 0))
    }
}

fn finite_ratio(what: &str, v: Complex64) -> Result<Complex64> {
    if v.re.is_finite() && v.im.is_finite() {
        Ok(v)
    } else {
        Err(Error::DivisionByZero(format!("{what}: vanishing denominator")))
    }
}

fn nonzero(v: Complex64, what: &str) -> Result<Complex64> {
    if v.norm() < 1e-14 {
        Err(Error::DivisionByZero(format!("{what}: vanishing denominator")))
    } else {
        Ok(v)
    }
}

/// G(x) in a Doney class.
pub fn doney_g(params: &StableParams, x: f64) -> Result<f64> {
    DoneyForms::new(params)?.g(x)
}

/// F̂(x) = e^{−x cos(π/α)} sin(x sin(π/α)) for a spectrally negative process.
pub fn one_sided_f_hat(alpha: f64, x: f64) -> f64 {
    let t = PI / alpha;
    (-x * t.cos()).exp() * (x * t.sin()).sin()
}

/// F̂ for a spectrally negative process rebuilt from the rotated supremum
/// density e^{iπ/α} exp(−e^{iπ/α} x) through
/// e^{iπ/α} f(e^{iπ/α} x) = (2/√α) S₂(1+αρ) (F̂ + e^{iπρ} F̂′).
pub fn one_sided_f_hat_from_rotation(alpha: f64, x: f64) -> Result<f64> {
    if !(alpha > 1.0 && alpha <= 2.0) {
        return Err(Error::domain(format!("one-sided mode needs α ∈ (1, 2], got {alpha}")));
    }
    let rot = Complex64::from_polar(1.0, PI / alpha);
    let lhs = rot * (-rot * x).exp();
    let w = lhs * alpha.sqrt() / (2.0 * S2Evaluator::new(alpha)?.s2_real(2.0)?);
    // ρ = 1/α, so e^{iπρ} = rot and F̂ is real
    Ok(-(w / rot).im / (PI / alpha).sin())
}

/// c G(x) for the primal F of a spectrally negative process, from
/// (α/2π) sin(πα) ∫₀^∞ e^{−ux} u^α / (1 + 2cos(πα) u^α + u^{2α}) du.
pub fn one_sided_g_part(alpha: f64, x: f64, tol: f64) -> Result<f64> {
    if !(alpha > 1.0 && alpha < 2.0) {
        return Err(Error::domain(format!("needs α ∈ (1, 2), got {alpha}")));
    }
    if !(x > 0.0) {
        return Err(Error::domain(format!("x = {x} must be positive")));
    }
    let c = (PI * alpha).cos();
    let integrand = |u: f64| {
        let ua = u.powf(alpha);
        (-u * x).exp() * ua / (1.0 + 2.0 * c * ua + ua * ua)
    };
    let v = integrate_semi_infinite(integrand, IntegrandProfile::exponential(x), tol)?
        .into_result("one-sided G integral")?;
    Ok(alpha / (2.0 * PI) * (PI * alpha).sin() * v)
}

/// Both sides of ∫₀^{min(x,y)} Im[e^{2πi/α} f_X̲((x−z)e^{iπ/α}) f_X̄((y−z)e^{iπ/α})] dz = (2/α) F(x) F̂(y).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LuckyIntegral {
    pub lhs: f64,
    pub rhs: f64,
    /// |lhs − rhs| / |rhs|.
    pub residual: f64,
}

/// Evaluates both sides of the lucky integral identity.
pub fn verify_lucky_integral(params: &StableParams, x: f64, y: f64) -> Result<LuckyIntegral> {
    if !(x > 0.0 && y > 0.0) {
        return Err(Error::domain("x and y must be positive"));
    }
    let a = params.alpha();
    if !(a > 1.0 || (params.rho() - 0.5).abs() < 1e-15) {
        return Err(Error::domain("the rotated densities are only evaluated for α > 1 or ρ = 1/2"));
    }
    let sup = RotatedSupDensity::new(params)?;
    let inf = RotatedSupDensity::new(&params.dual())?;
    let m = x.min(y);
    let r: QuadratureResult<f64> = tanh_sinh(
        |w: f64| (inf.eval((x - m) + w) * sup.eval((y - m) + w)).im,
        0.0,
        m,
        1e-12,
    );
    let lhs = r.into_result("lucky integral")?;
    let f = EigenFn::new(params, Direction::Primal)?;
    let fh = EigenFn::new(params, Direction::Dual)?;
    let rhs = 2.0 / a * f.f(x) * fh.f(y);
    Ok(LuckyIntegral {
        lhs,
        rhs,
        residual: (lhs - rhs).abs() / rhs.abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stable_model::OneSidedSide;
    use crate::wiener_hopf::{phi, Extremum};

    fn p(a: f64, r: f64) -> StableParams {
        StableParams::new(a, r).unwrap()
    }

    #[test]
    fn brownian_reduces_to_sine() {
        let f = EigenFn::new(&p(2.0, 0.5), Direction::Primal).unwrap();
        assert!(f.g_coefficient().abs() <= 1e-10);
        for &x in &[0.3, 1.0, 4.0] {
            assert!((f.f(x) - x.sin()).abs() < 1e-14);
            assert!((f.f_prime(x) - x.cos()).abs() < 1e-14);
        }
        let z = Complex64::new(1.7, 0.0);
        assert!((f.laplace(z).unwrap().re - 1.0 / (1.0 + z.re * z.re)).abs() < 1e-10);
        let s = Complex64::new(-0.5, 0.0);
        let want = gamma(s) * sin_pi(s / 2.0);
        assert!((f.mellin(s).unwrap() - want).norm() < 1e-10);
    }

    #[test]
    fn g_positive_and_completely_monotone() {
        let f = EigenFn::new(&p(1.5, 0.55), Direction::Primal).unwrap();
        assert!(f.g(0.0).is_finite() && f.g(0.0) > 0.0);
        let h = 0.05;
        let xs: Vec<f64> = (0..60).map(|k| 0.2 + h * k as f64).collect();
        let mut d: Vec<f64> = xs.iter().map(|&x| f.g(x)).collect();
        for order in 1..=4 {
            d = d.windows(2).map(|w| w[1] - w[0]).collect();
            let sign = if order % 2 == 1 { -1.0 } else { 1.0 };
            assert!(d.iter().all(|&v| sign * v > 0.0), "order {order}");
        }
    }

    #[test]
    fn f_vanishes_at_origin() {
        for &(a, r) in &[(1.5, 0.55), (1.3, 0.5), (0.8, 0.6)] {
            let f = EigenFn::new(&p(a, r), Direction::Primal).unwrap();
            assert!(f.f_at_origin().abs() < 1e-12, "({a},{r}) {}", f.f_at_origin());
            if a > 1.0 {
                assert!(f.f(1e-6).abs() < 1e-3, "({a},{r}) {}", f.f(1e-6));
            }
            let ah = a * (1.0 - r);
            let ratios: Vec<f64> = [1e-3, 1e-4, 1e-5]
                .iter()
                .map(|&x| f.f(x) / x.powf(ah))
                .collect();
            assert!(ratios.iter().all(|v| v.abs() < 10.0), "{ratios:?}");
            let x = 0.37;
            assert!((f.f_increment(x) - f.f(x)).abs() < 1e-12);
        }
    }

    #[test]
    fn complex_continuation_agrees_on_the_axis() {
        let f = EigenFn::new(&p(1.5, 0.55), Direction::Primal).unwrap();
        for &x in &[0.4, 1.3, 6.0] {
            let v = f.f_at(Complex64::new(x, 0.0));
            assert!((v.re - f.f(x)).abs() < 1e-13 && v.im.abs() < 1e-13);
        }
        // Schwarz reflection
        let w = Complex64::new(0.9, 0.4);
        assert!((f.f_at(w.conj()) - f.f_at(w).conj()).norm() < 1e-13);
    }

    #[test]
    fn derivative_matches_difference_quotient() {
        let f = EigenFn::new(&p(1.5, 0.55), Direction::Dual).unwrap();
        let (x, h) = (1.2, 1e-5);
        let fd = (f.f(x + h) - f.f(x - h)) / (2.0 * h);
        assert!((fd - f.f_prime(x)).abs() < 1e-8);
    }

    #[test]
    fn laplace_closed_form_vs_quadrature() {
        for &(a, r) in &[(1.5, 0.55), (1.3, 0.5), (1.7, 0.45)] {
            let f = EigenFn::new(&p(a, r), Direction::Primal).unwrap();
            for &z in &[1.0, 2.0, 5.0] {
                let z = Complex64::new(z, 0.0);
                let c = f.laplace(z).unwrap();
                let n = f.laplace_numeric(z, 1e-10).unwrap();
                assert!((c - n).norm() < 1e-6, "({a},{r}) z={z}: {c} vs {n}");
            }
        }
        let f = EigenFn::new(&p(1.5, 0.55), Direction::Primal).unwrap();
        let z = Complex64::new(2.0, 1.5);
        let c = f.laplace(z).unwrap();
        assert!((c - f.laplace_numeric(z, 1e-10).unwrap()).norm() < 1e-6);
        assert!((f.laplace(z.conj()).unwrap() - c.conj()).norm() < 1e-12);
        assert!(f.laplace(Complex64::new(-0.1, 0.0)).is_err());
    }

    #[test]
    fn mellin_closed_form_vs_quadrature() {
        for &(a, r) in &[(1.5, 0.55), (1.3, 0.5)] {
            let f = EigenFn::new(&p(a, r), Direction::Primal).unwrap();
            let z = Complex64::new(-0.3, 1.0);
            let c = f.mellin(z).unwrap();
            let n = f.mellin_numeric(z, 1e-9).unwrap();
            assert!((c - n).norm() < 1e-5, "({a},{r}): {c} vs {n}");
        }
        let f = EigenFn::new(&p(1.5, 0.45), Direction::Primal).unwrap();
        assert!(f.mellin(Complex64::new(-0.3, 0.0)).is_err());
    }

    #[test]
    fn mellin_finite_on_strip() {
        let f = EigenFn::new(&p(1.5, 0.55), Direction::Primal).unwrap();
        let lo = -1.5 * 0.45;
        for i in 1..20 {
            let re = lo * i as f64 / 20.0;
            for &im in &[0.0, 0.7, 3.0] {
                let v = f.mellin(Complex64::new(re, im)).unwrap();
                assert!(v.re.is_finite() && v.im.is_finite());
            }
        }
    }

    #[test]
    fn rotated_density_identity() {
        let pr = p(1.5, 0.55);
        let rot = RotatedSupDensity::new(&pr).unwrap();
        let fh = EigenFn::new(&pr, Direction::Dual).unwrap();
        let c = 2.0 / 1.5f64.sqrt() * S2Evaluator::new(1.5).unwrap().s2_real(1.0 + 1.5 * 0.55).unwrap();
        let e = Complex64::from_polar(1.0, PI * 0.55);
        for &x in &[0.5, 1.0, 2.0] {
            let lhs = rot.eval(x);
            let rhs = c * (fh.f(x) + e * fh.f_prime(x));
            assert!((lhs - rhs).norm() < 1e-6, "x={x}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn lucky_integral() {
        let r = verify_lucky_integral(&p(1.5, 0.55), 1.0, 1.5).unwrap();
        assert!(r.residual < 1e-5, "{r:?}");
        let sym = verify_lucky_integral(&p(1.5, 0.5), 0.8, 0.8).unwrap();
        assert!(sym.lhs > 0.0 && sym.residual < 1e-5, "{sym:?}");
    }

    #[test]
    fn doney_forms_match_s2_route() {
        for &(a, r, k, l) in &[(1.4, 3.0 / 7.0, 1, 2), (1.4, 4.0 / 7.0, -2, -2)] {
            let pr = p(a, r);
            let d = DoneyForms::new(&pr).unwrap();
            assert_eq!((d.class().k, d.class().l), (k, l));
            let s2 = S2Evaluator::new(a).unwrap();
            let f = EigenFn::new(&pr, Direction::Primal).unwrap();
            for &z in &[0.3, 0.7, 2.5, 7.0, 15.0] {
                let g = d.g_integrand(z).unwrap();
                let want = g_integrand(&s2, &pr, z).unwrap();
                assert!((g.re - want).abs() < 1e-9 * want && g.im.abs() < 1e-9 * want);
                let lap = d.laplace(z).unwrap();
                let want = f.laplace(Complex64::new(z, 0.0)).unwrap();
                assert!((lap - want).norm() < 1e-9 * want.norm(), "{lap} vs {want}");
                let ph = d.phi(z).unwrap();
                let want = phi(&pr, Extremum::Supremum, Complex64::new(z, 0.0)).unwrap();
                assert!((ph - want).norm() < 1e-9);
            }
            for &s in &[Complex64::new(-0.3, 1.0), Complex64::new(-0.1, 0.5)] {
                if r >= 0.5 {
                    let m = d.mellin(s).unwrap();
                    let want = f.mellin(s).unwrap();
                    assert!((m - want).norm() < 1e-9 * want.norm());
                }
            }
            let g1 = d.g(1.0).unwrap();
            assert!((g1 - f.g(1.0)).abs() < 1e-7 * f.g(1.0));
        }
        assert!(DoneyForms::new(&p(1.5, 0.55)).is_err());
    }

    #[test]
    fn spectrally_negative_closed_forms() {
        let pr = StableParams::one_sided(1.5, OneSidedSide::SpectrallyNegative).unwrap();
        let fh = EigenFn::new(&pr, Direction::Dual).unwrap();
        assert!(fh.g_coefficient().abs() < 1e-14);
        for &x in &[0.3, 1.0, 2.5] {
            let closed = one_sided_f_hat(1.5, x);
            assert!((fh.f(x) - closed).abs() < 1e-12);
            assert!((one_sided_f_hat_from_rotation(1.5, x).unwrap() - closed).abs() < 1e-10);
        }
        let f = EigenFn::new(&pr, Direction::Primal).unwrap();
        let part = one_sided_g_part(1.5, 1.0, 1e-12).unwrap();
        assert!((part - -0.066_707_646_455_065_4).abs() < 1e-10, "{part}");
        assert!((f.g_coefficient() * f.g(1.0) - part).abs() < 1e-7);
    }
}
