//! Spectral representations of the stable process killed on leaving (0, ∞):
//! survival probabilities, transition densities, the transform pair Π, Π̂,
//! the semigroup, and the eigenfunction relation.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::eigenfunctions::{Direction, EigenFn};
use crate::error::{Error, Result};
use crate::numerics::{
    gauss_kronrod, integrate_oscillatory_decaying, integrate_semi_infinite, tanh_sinh,
    IntegrandProfile, QuadratureResult, Scalar,
};
use crate::special_functions::S2Evaluator;
use crate::stable_model::StableParams;

/// Largest tolerated ratio between the integrand's peak and its scale.
const MAX_CONDITIONING: f64 = 1e8;

/// Quadrature settings shared by the spectral integrals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralConfig {
    /// Absolute tolerance asked of each quadrature.
    pub tol: f64,
    /// Fixed λ truncation; derived from e^{−tλ^α} when `None`.
    pub lambda_max: Option<f64>,
    /// Move oscillating factors onto rays in the complex λ- or x-plane where
    /// they decay; off means plain real-axis quadrature.
    pub rotate_oscillations: bool,
    /// Subinterval cap for adaptive Gauss–Kronrod.
    pub max_intervals: usize,
}

impl Default for SpectralConfig {
    fn default() -> Self {
        SpectralConfig {
            tol: 1e-10,
            lambda_max: None,
            rotate_oscillations: true,
            max_intervals: 4000,
        }
    }
}

impl SpectralConfig {
    /// λ beyond which e^{−t' λ^α + rate·λ} < tol, with a factor-2 margin.
    ///
    /// A positive `rate` is growth of the other factors; it must lose to the
    /// stable exponent, and the peak of the combined envelope must stay
    /// below [`MAX_CONDITIONING`].
    fn cutoff(&self, alpha: f64, t: f64, rate: f64) -> Result<f64> {
        if let Some(l) = self.lambda_max {
            return Ok(l);
        }
        let budget = (1.0 / self.tol).ln() + 10f64.ln();
        // rounding leaves |rate| ~ 1e-16 where the two waves balance
        if rate <= 1e-9 {
            let by_t = (budget / t).powf(1.0 / alpha);
            let by_rate = if rate < -1e-9 { budget / -rate } else { f64::INFINITY };
            return Ok(2.0 * by_t.min(by_rate));
        }
        if alpha <= 1.0 {
            return Err(Error::domain(
                "exponential growth of the eigenfunctions is not damped when α ≤ 1",
            ));
        }
        // peak of rate·λ − tλ^α
        let top = (rate / (t * alpha)).powf(1.0 / (alpha - 1.0));
        let log_peak = rate * top - t * top.powf(alpha);
        if log_peak > MAX_CONDITIONING.ln() {
            return Err(Error::NonConvergence {
                what: "spectral integral: growing eigenfunctions are badly conditioned here".into(),
                estimate: log_peak.exp(),
                error: f64::INFINITY,
            });
        }
        let mut l = (budget / t).powf(1.0 / alpha);
        for _ in 0..100 {
            l = ((budget + log_peak.max(0.0) + rate * l) / t).powf(1.0 / alpha);
        }
        Ok(2.0 * l)
    }

    /// ∫₀^end split into a tanh-sinh head on [0, split], which absorbs
    /// endpoint singularities, and adaptive Gauss–Kronrod on the rest.
    fn integrate<T: Scalar>(&self, f: impl Fn(f64) -> T, split: f64, end: f64, what: &str) -> Result<T> {
        let split = split.min(end);
        let head = tanh_sinh(&f, 0.0, split, 0.5 * self.tol);
        let tail = gauss_kronrod(&f, split, end, 0.5 * self.tol, self.max_intervals);
        head.combine(tail).into_result(what)
    }
}

/// Whether a test function belongs to the class on which Π̂ and the
/// semigroup formula are proved.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Membership {
    /// Analytic with super-exponential decay in a sector; valid for α ≥ `min_alpha`.
    XAlphaMember { min_alpha: f64 },
    /// Only known to be square integrable on (0, ∞).
    L2Only,
}

#[derive(Clone)]
enum Node {
    PowerExp,
    StretchedExp(f64),
    Rescaled(f64, TestFunction),
    Product(TestFunction, TestFunction),
    Linear(f64, TestFunction, f64, TestFunction),
    Closure(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
    Table(CubicTable),
}

/// A function on (0, ∞) fed to Π, Π̂ and the semigroup.
///
/// Built-ins and their products, linear combinations and rescalings are
/// members of the admissible class by construction and can be evaluated off
/// the real axis; closures and tables are square-integrable inputs only.
#[derive(Clone)]
pub struct TestFunction {
    node: Arc<Node>,
}

impl fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &*self.node {
            Node::PowerExp => write!(f, "(1+x)^-x"),
            Node::StretchedExp(b) => write!(f, "exp(-x^{b})"),
            Node::Rescaled(a, u) => write!(f, "{u:?}∘({a}x)"),
            Node::Product(u, v) => write!(f, "({u:?})·({v:?})"),
            Node::Linear(a, u, b, v) => write!(f, "{a}·({u:?}) + {b}·({v:?})"),
            Node::Closure(_) => write!(f, "<closure>"),
            Node::Table(t) => write!(f, "<table of {} points>", t.x.len()),
        }
    }
}

impl TestFunction {
    fn wrap(node: Node) -> Self {
        TestFunction { node: Arc::new(node) }
    }

    /// u(x) = (1 + x)^{−x}.
    pub fn power_exp() -> Self {
        Self::wrap(Node::PowerExp)
    }

    /// u(x) = e^{−x^β}; admissible for 1 < β ≤ α.
    pub fn stretched_exp(beta: f64) -> Result<Self> {
        if !(beta > 1.0 && beta <= 2.0) {
            return Err(Error::domain(format!(
                "e^(-x^β) needs β ∈ (1, 2] for super-exponential decay, got {beta}"
            )));
        }
        Ok(Self::wrap(Node::StretchedExp(beta)))
    }

    /// x ↦ u(a x), a > 0.
    pub fn rescale(&self, a: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::domain(format!("scale {a} must be positive")));
        }
        Ok(Self::wrap(Node::Rescaled(a, self.clone())))
    }

    pub fn product(&self, other: &TestFunction) -> Self {
        Self::wrap(Node::Product(self.clone(), other.clone()))
    }

    /// a·u + b·v.
    pub fn linear(a: f64, u: &TestFunction, b: f64, v: &TestFunction) -> Self {
        Self::wrap(Node::Linear(a, u.clone(), b, v.clone()))
    }

    /// An arbitrary real function, treated as square integrable only.
    pub fn from_fn(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self::wrap(Node::Closure(Arc::new(f)))
    }

    /// Piecewise-cubic interpolation in ln x of tabulated values; zero past
    /// the last abscissa, constant before the first.
    pub fn tabulated(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        Ok(Self::wrap(Node::Table(CubicTable::new(x, y)?)))
    }

    pub fn membership(&self) -> Membership {
        use Membership::*;
        let join = |a: Membership, b: Membership| match (a, b) {
            (XAlphaMember { min_alpha: p }, XAlphaMember { min_alpha: q }) => {
                XAlphaMember { min_alpha: p.max(q) }
            }
            _ => L2Only,
        };
        match &*self.node {
            Node::PowerExp => XAlphaMember { min_alpha: 0.0 },
            Node::StretchedExp(b) => XAlphaMember { min_alpha: *b },
            Node::Rescaled(_, u) => u.membership(),
            Node::Product(u, v) | Node::Linear(_, u, _, v) => join(u.membership(), v.membership()),
            Node::Closure(_) | Node::Table(_) => L2Only,
        }
    }

    /// Whether the function is admissible for stability index α.
    pub fn is_member_for(&self, alpha: f64) -> bool {
        matches!(self.membership(), Membership::XAlphaMember { min_alpha } if alpha >= min_alpha)
    }

    pub fn eval(&self, x: f64) -> f64 {
        match &*self.node {
            Node::PowerExp => (-x * x.ln_1p()).exp(),
            Node::StretchedExp(b) => (-x.powf(*b)).exp(),
            Node::Rescaled(a, u) => u.eval(a * x),
            Node::Product(u, v) => u.eval(x) * v.eval(x),
            Node::Linear(a, u, b, v) => a * u.eval(x) + b * v.eval(x),
            Node::Closure(f) => f(x),
            Node::Table(t) => t.eval(x),
        }
    }

    /// Analytic continuation, available for members only.
    pub fn eval_complex(&self, z: Complex64) -> Option<Complex64> {
        Some(match &*self.node {
            Node::PowerExp => (-z * (1.0 + z).ln()).exp(),
            Node::StretchedExp(b) => (-z.powf(*b)).exp(),
            Node::Rescaled(a, u) => u.eval_complex(z * a)?,
            Node::Product(u, v) => u.eval_complex(z)? * v.eval_complex(z)?,
            Node::Linear(a, u, b, v) => u.eval_complex(z)? * a + v.eval_complex(z)? * b,
            Node::Closure(_) | Node::Table(_) => return None,
        })
    }

    /// Half-opening of the sector |arg x| < ζ where the function decays
    /// super-exponentially.
    pub fn decay_sector(&self) -> Option<f64> {
        match &*self.node {
            Node::PowerExp => Some(0.5 * PI),
            Node::StretchedExp(b) => Some(0.5 * PI / b),
            Node::Rescaled(_, u) => u.decay_sector(),
            Node::Product(u, v) | Node::Linear(_, u, _, v) => {
                Some(u.decay_sector()?.min(v.decay_sector()?))
            }
            Node::Closure(_) | Node::Table(_) => None,
        }
    }

    /// A point beyond which |u| < eps on the positive axis, when known.
    pub fn support_bound(&self, eps: f64) -> Option<f64> {
        let budget = (1.0 / eps).ln().max(1.0);
        match &*self.node {
            Node::PowerExp => {
                // x ln(1+x) = budget by Newton from above
                let mut x = budget;
                for _ in 0..60 {
                    let g = x * x.ln_1p() - budget;
                    let dg = x.ln_1p() + x / (1.0 + x);
                    x -= g / dg;
                }
                Some(x)
            }
            Node::StretchedExp(b) => Some(budget.powf(1.0 / b)),
            Node::Rescaled(a, u) => Some(u.support_bound(eps)? / a),
            Node::Product(u, v) => match (u.support_bound(eps), v.support_bound(eps)) {
                (Some(p), Some(q)) => Some(p.min(q)),
                (p, q) => p.or(q),
            },
            Node::Linear(_, u, _, v) => Some(u.support_bound(eps)?.max(v.support_bound(eps)?)),
            Node::Closure(_) => None,
            Node::Table(t) => t.x.last().copied(),
        }
    }
}

/// Cubic Hermite interpolation in ln x with centred-difference slopes.
#[derive(Debug, Clone)]
struct CubicTable {
    x: Vec<f64>,
    s: Vec<f64>,
    y: Vec<f64>,
    dy: Vec<f64>,
}

impl CubicTable {
    fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() || x.len() < 2 {
            return Err(Error::domain("a table needs at least two (x, y) pairs of equal length"));
        }
        if x[0] <= 0.0 || x.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::domain("table abscissae must be positive and increasing"));
        }
        let s: Vec<f64> = x.iter().map(|v| v.ln()).collect();
        let n = s.len();
        let dy = (0..n)
            .map(|i| {
                let (a, b) = (i.saturating_sub(1), (i + 1).min(n - 1));
                (y[b] - y[a]) / (s[b] - s[a])
            })
            .collect();
        Ok(CubicTable { x, s, y, dy })
    }

    fn eval(&self, x: f64) -> f64 {
        let n = self.x.len();
        if x <= self.x[0] {
            return self.y[0];
        }
        if x > self.x[n - 1] {
            return 0.0;
        }
        let s = x.ln();
        let i = self.s.partition_point(|&v| v <= s).clamp(1, n - 1) - 1;
        let h = self.s[i + 1] - self.s[i];
        let u = (s - self.s[i]) / h;
        let (u2, u3) = (u * u, u * u * u);
        (2.0 * u3 - 3.0 * u2 + 1.0) * self.y[i]
            + (u3 - 2.0 * u2 + u) * h * self.dy[i]
            + (-2.0 * u3 + 3.0 * u2) * self.y[i + 1]
            + (u3 - u2) * h * self.dy[i + 1]
    }
}

/// Both sides of the eigenfunction relation P_t F(λ·)(x) = e^{−tλ^α} F(λx).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
}

/// F, F̂ and the quadrature settings for one parameter set.
#[derive(Debug, Clone)]
pub struct SpectralModel {
    params: StableParams,
    f: EigenFn,
    f_hat: EigenFn,
    survival_coef: f64,
    cfg: SpectralConfig,
}

fn is_half(r: f64) -> bool {
    (r - 0.5).abs() < 1e-12
}

/// cos(πr), exactly zero for the symmetric case so that no spurious growth
/// rate appears.
fn cos_pi(r: f64) -> f64 {
    if is_half(r) {
        0.0
    } else {
        (PI * r).cos()
    }
}

impl SpectralModel {
    pub fn new(params: &StableParams, cfg: SpectralConfig) -> Result<Self> {
        let a = params.alpha();
        let s2 = S2Evaluator::new(a)?;
        Ok(SpectralModel {
            params: *params,
            f: EigenFn::new(params, Direction::Primal)?,
            f_hat: EigenFn::new(params, Direction::Dual)?,
            survival_coef: a.sqrt() / PI * s2.s2_real(a * params.rho_hat())?,
            cfg,
        })
    }

    pub fn params(&self) -> &StableParams {
        &self.params
    }

    pub fn config(&self) -> &SpectralConfig {
        &self.cfg
    }

    pub fn eigenfunction(&self) -> &EigenFn {
        &self.f
    }

    pub fn co_eigenfunction(&self) -> &EigenFn {
        &self.f_hat
    }

    fn alpha(&self) -> f64 {
        self.params.alpha()
    }

    fn require_survival_regime(&self) -> Result<()> {
        if self.alpha() > 1.0 || self.params.rho() >= 0.5 {
            Ok(())
        } else {
            Err(Error::domain("the survival formula needs α > 1 or ρ ≥ 1/2"))
        }
    }

    fn require_density_regime(&self) -> Result<()> {
        if self.alpha() > 1.0 || is_half(self.params.rho()) {
            Ok(())
        } else {
            Err(Error::domain("the transition density formula needs α > 1 or ρ = 1/2"))
        }
    }

    fn require_semigroup_regime(&self) -> Result<()> {
        if self.params.rho() >= 0.5 - 1e-12 {
            Ok(())
        } else {
            Err(Error::domain("the semigroup formula needs ρ ≥ 1/2"))
        }
    }

    /// P_x(T₀ > t) = (√α/π) S₂(αρ̂) ∫₀^∞ e^{−tλ^α} F(λx) λ^{−1} dλ.
    pub fn survival(&self, x: f64, t: f64) -> Result<f64> {
        self.require_survival_regime()?;
        if !(x > 0.0 && t > 0.0) {
            return Err(Error::domain("survival needs x, t > 0"));
        }
        let a = self.alpha();
        let growth = x * cos_pi(self.params.rho()).max(0.0);
        let end = self.cfg.cutoff(a, t, growth)?;
        let f = |l: f64| (-t * l.powf(a)).exp() * self.f.f_stable(l * x) / l;
        let v = self.cfg.integrate(f, 1.0 / x, end, "survival λ-integral")?;
        Ok(self.survival_coef * v)
    }

    /// p_t(x, y) = (2/π) ∫₀^∞ e^{−tλ^α} F(λx) F̂(λy) dλ.
    pub fn transition_density(&self, x: f64, y: f64, t: f64) -> Result<f64> {
        self.require_density_regime()?;
        if !(x > 0.0 && y > 0.0 && t > 0.0) {
            return Err(Error::domain("the transition density needs x, y, t > 0"));
        }
        let v = if self.cfg.rotate_oscillations {
            self.density_rotated(x, y, t)?
        } else {
            self.density_real_axis(x, y, t)?
        };
        Ok(2.0 / PI * v)
    }

    fn density_real_axis(&self, x: f64, y: f64, t: f64) -> Result<f64> {
        let a = self.alpha();
        let grow = |e: &EigenFn, z: f64| z * cos_pi(e.rho()).max(0.0);
        let end = self.cfg.cutoff(a, t, grow(&self.f, x) + grow(&self.f_hat, y))?;
        let f = |l: f64| (-t * l.powf(a)).exp() * self.f.f_stable(l * x) * self.f_hat.f_stable(l * y);
        self.cfg.integrate(f, 1.0 / x.max(y), end, "transition density λ-integral")
    }

    /// The wave of the factor with the larger argument is integrated along a
    /// ray arg λ = θ on which it decays like e^{−c|x−y|λ}; its G part stays
    /// on the real axis.
    fn density_rotated(&self, x: f64, y: f64, t: f64) -> Result<f64> {
        let a = self.alpha();
        let (big, bx, small, sx) = if y >= x {
            (&self.f_hat, y, &self.f, x)
        } else {
            (&self.f, x, &self.f_hat, y)
        };
        // real axis: e^{−tλ^α} F_small(λ s) · c G_big(λ b)
        let grow = sx * cos_pi(small.rho()).max(0.0);
        let end = self.cfg.cutoff(a, t, grow)?;
        let coef = big.g_coefficient();
        let real_part = if coef == 0.0 {
            0.0
        } else {
            let f = |l: f64| (-t * l.powf(a)).exp() * small.f_stable(l * sx) * coef * big.g(l * bx);
            self.cfg.integrate(f, 1.0 / bx, end, "transition density, G part")?
        };
        // ray: Im ∫ e^{−tw^α} F_small(w s) e^{w b e^{iπρ} + iφ} dw
        let lo = (0.5 * PI - PI * big.rho()).max(0.0);
        let hi = (0.5 * PI / a).min(0.5 * PI);
        let theta = 0.5 * (lo + hi);
        let dir = Complex64::from_polar(1.0, theta);
        let (rb, rs) = (PI * big.rho(), PI * small.rho());
        let rate = bx * (rb + theta).cos()
            + sx * (rs + theta).cos().max((theta - rs).cos()).max(0.0);
        let t_ray = t * (a * theta).cos();
        let end = self.cfg.cutoff(a, t_ray, rate)?;
        let g = |l: f64| {
            let w = dir * l;
            (-t * w.powf(a)).exp() * small.f_at(w * sx) * big.wave_at(w * bx) * dir
        };
        let ray: Complex64 = self.cfg.integrate(g, 1.0 / bx, end, "transition density, ray part")?;
        Ok(real_part + ray.im)
    }

    /// √(2/π) ∫₀^∞ F_e(λx) u(x) dx for F_e = F or F̂.
    fn transform(&self, e: &EigenFn, u: &TestFunction, lambda: f64) -> Result<f64> {
        if !(lambda > 0.0) {
            return Err(Error::domain(format!("λ = {lambda} must be positive")));
        }
        let r = e.rho();
        let bounded = r >= 0.5 - 1e-12;
        let ray = self.ray_for(e, u).filter(|_| self.cfg.rotate_oscillations || !bounded);
        let v = match ray {
            Some(theta) => self.transform_on_ray(e, u, lambda, theta)?,
            None if bounded => {
                let tol = self.cfg.tol;
                let f = |x: f64| e.f_stable(lambda * x) * u.eval(x);
                match u.support_bound(1e-3 * tol) {
                    Some(end) => self.cfg.integrate(f, 1.0 / lambda, end, "transform x-integral")?,
                    None => {
                        let decay = lambda * (-cos_pi(r)).max(0.0);
                        integrate_oscillatory_decaying(f, decay, lambda * (PI * r).sin(), tol)?
                            .into_result("transform x-integral")?
                    }
                }
            }
            None => {
                return Err(Error::domain(format!(
                    "the kernel grows like e^(x cos πρ); {u:?} must continue analytically and decay \
                     in a sector wider than {:.4} to be transformed",
                    0.5 * PI - PI * r
                )))
            }
        };
        Ok((2.0 / PI).sqrt() * v)
    }

    /// A ray arg x = θ on which the wave of F_e decays and u is still
    /// analytic and decaying.
    fn ray_for(&self, e: &EigenFn, u: &TestFunction) -> Option<f64> {
        let zeta = u.decay_sector()?;
        let theta_min = (0.5 * PI - PI * e.rho()).max(0.0);
        (theta_min < zeta).then_some(0.5 * (theta_min + zeta))
    }

    /// The wave part along the ray, where it decays exponentially instead
    /// of oscillating; the G part stays on the real axis.
    fn transform_on_ray(&self, e: &EigenFn, u: &TestFunction, lambda: f64, theta: f64) -> Result<f64> {
        let dir = Complex64::from_polar(1.0, theta);
        let tol = self.cfg.tol;
        let wave = |r: f64| {
            let w = dir * r;
            let uw = u.eval_complex(w).expect("a decay sector implies a continuation");
            e.wave_at(w * lambda) * uw * dir
        };
        let rate = lambda * -(PI * e.rho() + theta).cos();
        let k: Complex64 = integrate_semi_infinite(wave, IntegrandProfile::exponential(rate.max(1e-3)), tol)?
            .into_result("transform along a ray")?;
        let coef = e.g_coefficient();
        if coef == 0.0 {
            return Ok(k.im);
        }
        let end = u.support_bound(1e-3 * tol).expect("sectorial decay implies a support bound");
        let g = self.cfg.integrate(|x: f64| e.g(lambda * x) * u.eval(x), 1.0 / lambda, end, "transform, G part")?;
        Ok(k.im + coef * g)
    }

    /// Π u(λ) = √(2/π) ∫₀^∞ F(λx) u(x) dx.
    pub fn pi_transform(&self, u: &TestFunction, lambda: f64) -> Result<f64> {
        self.transform(&self.f, u, lambda)
    }

    /// Π̂ u(λ) = √(2/π) ∫₀^∞ F̂(λx) u(x) dx for admissible u.
    pub fn pi_hat_transform(&self, u: &TestFunction, lambda: f64) -> Result<f64> {
        if !u.is_member_for(self.alpha()) {
            return Err(Error::domain(format!(
                "Π̂ is defined here for admissible test functions only; {u:?} is not one for α = {}",
                self.alpha()
            )));
        }
        self.transform(&self.f_hat, u, lambda)
    }

    /// √(2/π) ∫₀^∞ F(λx) v(λ) dλ for a λ-function v known to decay.
    fn pi_of(&self, v: impl Fn(f64) -> f64, x: f64) -> Result<f64> {
        let r = self.params.rho();
        let decay = x * (-cos_pi(r)).max(0.0);
        let f = |l: f64| self.f.f_stable(l * x) * v(l);
        let q: QuadratureResult<f64> = integrate_oscillatory_decaying(f, decay, x * (PI * r).sin(), self.cfg.tol)?;
        Ok((2.0 / PI).sqrt() * q.into_result("outer λ-integral")?)
    }

    /// P_t u(x) = Π[e^{−tλ^α} Π̂u](x).
    pub fn semigroup_apply(&self, u: &TestFunction, t: f64, x: f64) -> Result<f64> {
        self.require_semigroup_regime()?;
        if !(t > 0.0 && x > 0.0) {
            return Err(Error::domain("the semigroup needs t, x > 0"));
        }
        self.apply(u, t, x)
    }

    /// Π Π̂ u(x), which reproduces u.
    pub fn pi_pi_hat(&self, u: &TestFunction, x: f64) -> Result<f64> {
        self.require_semigroup_regime()?;
        if !(x > 0.0) {
            return Err(Error::domain("x must be positive"));
        }
        self.apply(u, 0.0, x)
    }

    fn apply(&self, u: &TestFunction, t: f64, x: f64) -> Result<f64> {
        if !u.is_member_for(self.alpha()) {
            return Err(Error::domain(format!("{u:?} is not admissible for α = {}", self.alpha())));
        }
        let a = self.alpha();
        let first_err = std::cell::RefCell::new(None);
        let v = |l: f64| {
            let damp = (-t * l.powf(a)).exp();
            if damp == 0.0 {
                return 0.0;
            }
            match self.pi_hat_transform(u, l) {
                Ok(w) => damp * w,
                Err(e) => {
                    first_err.borrow_mut().get_or_insert(e);
                    f64::NAN
                }
            }
        };
        let out = self.pi_of(v, x);
        if let Some(e) = first_err.into_inner() {
            return Err(e);
        }
        out
    }

    /// ∫₀^∞ p_t(x, y) u(y) dy by quadrature over the transition density.
    pub fn density_route(&self, u: &TestFunction, t: f64, x: f64) -> Result<f64> {
        let end = u.support_bound(1e-3 * self.cfg.tol).ok_or_else(|| {
            Error::domain("the density route needs a test function with known support bound")
        })?;
        self.y_integral(|y| Ok(self.transition_density(x, y, t)? * u.eval(y)), 0.0, end)
    }

    /// ∫₀^∞ p_t(x, y) dy, which should reproduce the survival probability.
    ///
    /// Quadrature runs in ln y up to Y = 10⁴·max(x, t^{1/α}); beyond that
    /// the density is continued as c·y^{−1−α} fitted at Y.
    pub fn density_mass(&self, x: f64, t: f64) -> Result<f64> {
        let a = self.alpha();
        let far = 1e4 * x.max(t.powf(1.0 / a));
        let head = self.y_integral(|y| self.transition_density(x, y, t), 0.0, x)?;
        let body = self.y_integral(
            |s| {
                let y = s.exp();
                Ok(self.transition_density(x, y, t)? * y)
            },
            x.ln(),
            far.ln(),
        )?;
        let tail = self.transition_density(x, far, t)? * far / a;
        Ok(head + body + tail)
    }

    /// Both sides of P_t F(λ·)(x) = e^{−tλ^α} F(λx), the left by the density route.
    pub fn eigen_check(&self, lambda: f64, t: f64, x: f64) -> Result<EigenCheck> {
        self.require_semigroup_regime()?;
        self.require_density_regime()?;
        if !(lambda >= 0.1) {
            return Err(Error::domain("the eigenfunction check is guarded to λ ≥ 0.1"));
        }
        if !(t > 0.0 && x > 0.0) {
            return Err(Error::domain("t and x must be positive"));
        }
        let r = self.params.rho();
        let prof = IntegrandProfile::power(-1.0 - self.alpha()).with_oscillation(lambda * (PI * r).sin());
        let lhs = self.y_semi_infinite(
            |y| Ok(self.transition_density(x, y, t)? * self.f.f_stable(lambda * y)),
            prof,
        )?;
        let rhs = (-t * lambda.powf(self.alpha())).exp() * self.f.f(lambda * x);
        Ok(EigenCheck {
            lhs,
            rhs,
            residual: (lhs - rhs).abs() / rhs.abs(),
        })
    }

    fn y_integral(&self, f: impl Fn(f64) -> Result<f64>, a: f64, b: f64) -> Result<f64> {
        let first_err = std::cell::RefCell::new(None);
        let g = |y: f64| match f(y) {
            Ok(v) => v,
            Err(e) => {
                first_err.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        };
        let r = gauss_kronrod(g, a, b, 10.0 * self.cfg.tol, self.cfg.max_intervals);
        if let Some(e) = first_err.into_inner() {
            return Err(e);
        }
        r.into_result("y-integral")
    }

    fn y_semi_infinite(&self, f: impl Fn(f64) -> Result<f64>, prof: IntegrandProfile) -> Result<f64> {
        let first_err = std::cell::RefCell::new(None);
        let g = |y: f64| match f(y) {
            Ok(v) => v,
            Err(e) => {
                first_err.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        };
        let r = integrate_semi_infinite(g, prof, 10.0 * self.cfg.tol);
        if let Some(e) = first_err.into_inner() {
            return Err(e);
        }
        r?.into_result("y-integral")
    }
}

/// P_x(T₀ > t).
pub fn survival(params: &StableParams, x: f64, t: f64, cfg: SpectralConfig) -> Result<f64> {
    SpectralModel::new(params, cfg)?.survival(x, t)
}

/// Density p_t(x, y) of the killed process.
pub fn transition_density(params: &StableParams, x: f64, y: f64, t: f64, cfg: SpectralConfig) -> Result<f64> {
    SpectralModel::new(params, cfg)?.transition_density(x, y, t)
}

/// Π u(λ).
pub fn pi_transform(params: &StableParams, u: &TestFunction, lambda: f64, cfg: SpectralConfig) -> Result<f64> {
    SpectralModel::new(params, cfg)?.pi_transform(u, lambda)
}

/// Π̂ u(λ).
pub fn pi_hat_transform(params: &StableParams, u: &TestFunction, lambda: f64, cfg: SpectralConfig) -> Result<f64> {
    SpectralModel::new(params, cfg)?.pi_hat_transform(u, lambda)
}

/// P_t u(x).
pub fn semigroup_apply(params: &StableParams, u: &TestFunction, t: f64, x: f64, cfg: SpectralConfig) -> Result<f64> {
    SpectralModel::new(params, cfg)?.semigroup_apply(u, t, x)
}

/// Residual of the eigenfunction relation at (λ, t, x).
pub fn eigen_check(params: &StableParams, lambda: f64, t: f64, x: f64, cfg: SpectralConfig) -> Result<EigenCheck> {
    SpectralModel::new(params, cfg)?.eigen_check(lambda, t, x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model(a: f64, r: f64) -> SpectralModel {
        SpectralModel::new(&StableParams::new(a, r).unwrap(), SpectralConfig::default()).unwrap()
    }

    fn heat_kernel(x: f64, y: f64, t: f64) -> f64 {
        let n = (4.0 * PI * t).sqrt();
        ((-(x - y).powi(2) / (4.0 * t)).exp() - (-(x + y).powi(2) / (4.0 * t)).exp()) / n
    }

    #[test]
    fn brownian_survival_and_density() {
        let m = model(2.0, 0.5);
        let erf = statrs::function::erf::erf(0.5);
        assert!((m.survival(1.0, 1.0).unwrap() - erf).abs() < 1e-9);
        for &(x, y, t) in &[(1.0, 1.5, 0.7), (0.3, 2.0, 0.2), (2.0, 0.5, 1.5)] {
            let p = m.transition_density(x, y, t).unwrap();
            assert!((p - heat_kernel(x, y, t)).abs() < 1e-9, "{p}");
        }
        let u = TestFunction::power_exp();
        let e = TestFunction::from_fn(|x| (-x).exp());
        for &l in &[0.5, 2.0] {
            let want = (2.0 / PI).sqrt() * l / (1.0 + l * l);
            assert!((m.pi_transform(&e, l).unwrap() - want).abs() < 1e-8);
            assert!((m.pi_transform(&u, l).unwrap() - m.pi_hat_transform(&u, l).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn rotated_and_real_axis_densities_agree() {
        let m = model(1.5, 0.55);
        let plain = SpectralModel::new(
            m.params(),
            SpectralConfig { rotate_oscillations: false, ..SpectralConfig::default() },
        )
        .unwrap();
        for &(x, y, t) in &[(1.0, 1.5, 1.0), (1.0, 0.4, 0.5), (0.7, 3.0, 2.0)] {
            let a = m.transition_density(x, y, t).unwrap();
            let b = plain.transition_density(x, y, t).unwrap();
            assert!((a - b).abs() < 1e-8, "({x},{y},{t}): {a} vs {b}");
        }
    }

    #[test]
    fn density_duality_and_scaling() {
        let p = model(1.5, 0.55);
        let q = model(1.5, 0.45);
        let a = p.transition_density(1.0, 2.0, 1.0).unwrap();
        let b = q.transition_density(2.0, 1.0, 1.0).unwrap();
        assert!((a - b).abs() < 1e-7, "{a} vs {b}");
        let t: f64 = 0.6;
        let s = t.powf(-1.0 / 1.5);
        let c = p.transition_density(1.0, 2.0, t).unwrap();
        let d = s * p.transition_density(s, 2.0 * s, 1.0).unwrap();
        assert!((c - d).abs() < 1e-8);
        assert!(c > 0.0);
    }

    #[test]
    fn survival_scaling_and_monotonicity() {
        let m = model(1.5, 0.6);
        let a = m.survival(2.0, 1.0).unwrap();
        let b = m.survival(1.0, 2f64.powf(-1.5)).unwrap();
        assert!((a - b).abs() < 1e-8);
        let ts = [0.25, 0.5, 1.0, 2.0, 4.0];
        let vals: Vec<f64> = ts.iter().map(|&t| m.survival(1.0, t).unwrap()).collect();
        assert!(vals.windows(2).all(|w| w[1] < w[0]), "{vals:?}");
        assert!(vals.iter().all(|&v| (0.0..=1.0).contains(&v)));
        let xs = [0.5, 1.0, 2.0];
        let vals: Vec<f64> = xs.iter().map(|&x| m.survival(x, 1.0).unwrap()).collect();
        assert!(vals.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn regimes_are_enforced() {
        let m = model(0.8, 0.45);
        assert!(matches!(m.survival(1.0, 1.0), Err(Error::Domain(_))));
        let m = model(0.8, 0.6);
        assert!(m.survival(1.0, 1.0).is_ok());
        assert!(matches!(m.transition_density(1.0, 1.0, 1.0), Err(Error::Domain(_))));
        let m = model(1.5, 0.45);
        let u = TestFunction::power_exp();
        assert!(matches!(m.semigroup_apply(&u, 1.0, 1.0), Err(Error::Domain(_))));
        let l2 = TestFunction::from_fn(|x| (-x).exp());
        assert!(matches!(model(1.5, 0.55).pi_hat_transform(&l2, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn test_function_algebra() {
        let u = TestFunction::power_exp();
        let v = TestFunction::stretched_exp(1.3).unwrap();
        assert!(TestFunction::stretched_exp(0.9).is_err());
        let w = TestFunction::linear(2.0, &u, -1.0, &v.rescale(0.5).unwrap());
        let x = 0.8;
        let want = 2.0 * u.eval(x) - v.eval(0.5 * x);
        assert!((w.eval(x) - want).abs() < 1e-15);
        assert!((w.eval_complex(Complex64::new(x, 0.0)).unwrap().re - want).abs() < 1e-15);
        assert!(w.is_member_for(1.5) && !w.is_member_for(1.2));
        assert_eq!(TestFunction::from_fn(|x| x).membership(), Membership::L2Only);
        let xs: Vec<f64> = (0..200).map(|k| 1e-3 * 1.05f64.powi(k)).collect();
        let ys: Vec<f64> = xs.iter().map(|&x| u.eval(x)).collect();
        let t = TestFunction::tabulated(xs, ys).unwrap();
        assert!((t.eval(0.77) - u.eval(0.77)).abs() < 1e-5);
        let b = u.support_bound(1e-20).unwrap();
        assert!((u.eval(b) - 1e-20).abs() < 1e-30);
    }
}

#[cfg(test)]
mod double_quadrature_tests {
    use super::*;

    fn model(a: f64, r: f64) -> SpectralModel {
        SpectralModel::new(&StableParams::new(a, r).unwrap(), SpectralConfig::default()).unwrap()
    }

    #[test]
    fn inversion_reproduces_the_test_function() {
        let m = model(1.5, 0.55);
        let u = TestFunction::power_exp();
        let v = m.pi_pi_hat(&u, 0.8).unwrap();
        assert!((v / u.eval(0.8) - 1.0).abs() < 1e-7, "{v}");
    }

    #[test]
    fn semigroup_matches_density_route() {
        let m = model(1.5, 0.55);
        let u = TestFunction::power_exp();
        let a = m.semigroup_apply(&u, 0.5, 1.0).unwrap();
        let b = m.density_route(&u, 0.5, 1.0).unwrap();
        assert!((a - b).abs() < 1e-8, "{a} vs {b}");
        // sub-Markov and contracting in time
        let later = m.semigroup_apply(&u, 2.0, 1.0).unwrap();
        assert!(0.0 < later && later < a && a < 1.0);
        let early = m.semigroup_apply(&u, 1e-3, 1.0).unwrap();
        assert!((early - u.eval(1.0)).abs() < 2e-2, "{early}");
    }

    #[test]
    fn density_mass_is_survival() {
        let m = model(1.5, 0.5);
        let mass = m.density_mass(1.0, 1.0).unwrap();
        let s = m.survival(1.0, 1.0).unwrap();
        assert!((mass - s).abs() < 1e-6, "{mass} vs {s}");
    }

    #[test]
    fn eigen_relation_by_density_route() {
        let c = model(1.5, 0.5).eigen_check(1.0, 0.5, 1.0).unwrap();
        assert!(c.residual < 1e-5, "{c:?}");
        assert!(model(1.5, 0.5).eigen_check(0.05, 0.5, 1.0).is_err());
    }

    #[test]
    fn ray_and_real_axis_transforms_agree() {
        let params = StableParams::new(1.5, 0.5).unwrap();
        let ray = SpectralModel::new(&params, SpectralConfig::default()).unwrap();
        let axis = SpectralModel::new(
            &params,
            SpectralConfig { rotate_oscillations: false, ..SpectralConfig::default() },
        )
        .unwrap();
        let u = TestFunction::power_exp();
        for &l in &[0.3, 1.0, 4.0] {
            let a = ray.pi_transform(&u, l).unwrap();
            let b = axis.pi_transform(&u, l).unwrap();
            assert!((a - b).abs() < 1e-9, "λ={l}: {a} vs {b}");
        }
    }

    #[test]
    fn transforms_scale_and_are_linear() {
        let m = model(1.5, 0.55);
        let u = TestFunction::power_exp();
        let v = TestFunction::stretched_exp(1.4).unwrap();
        let a = 1.7;
        let ua = u.rescale(a).unwrap();
        for &l in &[0.6, 2.5] {
            let lhs = m.pi_hat_transform(&ua, l).unwrap();
            let rhs = m.pi_hat_transform(&u, l / a).unwrap() / a;
            assert!((lhs - rhs).abs() < 1e-9, "{lhs} vs {rhs}");
            let w = TestFunction::linear(2.0, &u, -0.5, &v);
            let lhs = m.pi_transform(&w, l).unwrap();
            let rhs = 2.0 * m.pi_transform(&u, l).unwrap() - 0.5 * m.pi_transform(&v, l).unwrap();
            assert!((lhs - rhs).abs() < 1e-9);
        }
        // decay in λ for a smooth u
        let far: Vec<f64> = [10.0, 100.0, 1000.0].iter().map(|&l| m.pi_transform(&u, l).unwrap().abs()).collect();
        assert!(far.windows(2).all(|w| w[1] < w[0]), "{far:?}");
    }
}
