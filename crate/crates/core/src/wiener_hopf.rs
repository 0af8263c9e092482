//! Wiener–Hopf factors of a stable process, the densities of the supremum and
//! of minus the infimum at an independent Exp(1) time, their analytic
//! continuation, and the kernels built from them.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{tanh_sinh, LogGrid, LogGridSpec, PowerTail};
use crate::special_functions::{S2Evaluator, SurfacePoint};
use crate::stable_model::StableParams;

/// Correct digits asked of the tabulated mixtures.
const GRID_DIGITS: f64 = 15.0;

/// Which extremum a factor describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Extremum {
    /// X̄ at an Exp(1) time.
    Supremum,
    /// −X̲ at an Exp(1) time; the supremum of the dual process.
    Infimum,
}

/// φ(z) = E e^{−z X̄} or φ̂(z) = E e^{z X̲} for one parameter set.
#[derive(Debug, Clone)]
pub struct WhFactor {
    params: StableParams,
    direction: Extremum,
    s2: S2Evaluator,
}

impl WhFactor {
    pub fn new(params: StableParams, direction: Extremum) -> Result<Self> {
        Ok(WhFactor {
            params,
            direction,
            s2: S2Evaluator::new(params.alpha())?,
        })
    }

    /// Parameters whose supremum this factor describes.
    fn effective(&self) -> StableParams {
        match self.direction {
            Extremum::Supremum => self.params,
            Extremum::Infimum => self.params.dual(),
        }
    }

    /// φ at a point of the log surface, |arg z| < π(1/α + ρ̂).
    pub fn eval(&self, z: SurfacePoint) -> Result<Complex64> {
        let p = self.effective();
        let a = p.alpha();
        let limit = PI * (1.0 / a + p.rho_hat());
        if z.argument().abs() >= limit {
            return Err(Error::domain(format!(
                "arg z = {} is outside the analyticity sector |arg z| < {limit}",
                z.argument()
            )));
        }
        let b = 0.5 + 0.5 * a + 0.5 * a * p.rho();
        Ok(z.powf(-0.5 * a * p.rho()) * self.s2.pair(b, z)?)
    }

    /// φ at a complex point of the closed right half-plane.
    pub fn eval_complex(&self, z: Complex64) -> Result<Complex64> {
        if z.re < 0.0 {
            return Err(Error::domain(format!("Re z = {} < 0", z.re)));
        }
        self.eval(SurfacePoint::from_complex(z)?)
    }
}

/// φ(z) for the supremum (or, with `Extremum::Infimum`, φ̂).
pub fn phi(params: &StableParams, direction: Extremum, z: Complex64) -> Result<Complex64> {
    WhFactor::new(*params, direction)?.eval_complex(z)
}

/// sin(παρ)/π; zero when the mixture degenerates.
fn mixture_constant(p: &StableParams) -> f64 {
    (PI * p.alpha() * p.rho()).sin() / PI
}

/// The supremum of X at Exp(1) is exactly Exp(1) when αρ = 1.
fn is_exponential(p: &StableParams) -> bool {
    (p.alpha() * p.rho() - 1.0).abs() < 1e-12
}

fn require_mixture(p: &StableParams) -> Result<()> {
    if p.is_one_sided() {
        Err(Error::domain(
            "one-sided mode: use the closed-form extremum densities instead of the mixture",
        ))
    } else if is_exponential(p) {
        Err(Error::domain(
            "αρ = 1: the supremum is Exp(1) and its mixing measure is a point mass at u = 1",
        ))
    } else {
        Ok(())
    }
}

/// μ(u) on the positive axis with a prebuilt evaluator.
fn mu_with(s2: &S2Evaluator, p: &StableParams, u: f64) -> Result<f64> {
    let a = p.alpha();
    let b = 0.5 + a + 0.5 * a * p.rho();
    let pair = s2.abs_squared_on_ray(b, 0.0, u)?;
    Ok(mixture_constant(p) * u.powf(0.5 * a * p.rho_hat()) * pair)
}

/// μ continued to the log surface.
fn mu_analytic_with(s2: &S2Evaluator, p: &StableParams, u: SurfacePoint) -> Result<Complex64> {
    let a = p.alpha();
    let limit = PI * (1.0 / a + p.rho_hat());
    if u.argument().abs() >= limit {
        return Err(Error::domain(format!(
            "arg u = {} is outside the sector |arg u| < {limit}",
            u.argument()
        )));
    }
    let b = 0.5 + a + 0.5 * a * p.rho();
    Ok(mixture_constant(p) * u.powf(0.5 * a * p.rho_hat()) * s2.pair(b, u)?)
}

/// Mixing density μ of the supremum: f_X̄(x) = ∫₀^∞ e^{−xu} μ(u) du.
pub fn mu_density(params: &StableParams, u: f64) -> Result<f64> {
    require_mixture(params)?;
    if !(u > 0.0) {
        return Err(Error::domain(format!("u = {u} must be positive")));
    }
    mu_with(&S2Evaluator::new(params.alpha())?, params, u)
}

/// μ(u) at a point of the log surface with |arg u| < π(1/α + ρ̂).
pub fn mu_analytic(params: &StableParams, u: SurfacePoint) -> Result<Complex64> {
    require_mixture(params)?;
    mu_analytic_with(&S2Evaluator::new(params.alpha())?, params, u)
}

/// The two simple poles u± = e^{±iπ(1/α−ρ)} of μ.
pub fn mu_poles(params: &StableParams) -> (SurfacePoint, SurfacePoint) {
    let th = PI * (1.0 / params.alpha() - params.rho());
    (
        SurfacePoint::new(1.0, th).expect("unit modulus"),
        SurfacePoint::new(1.0, -th).expect("unit modulus"),
    )
}

/// Closed-form residue of μ at u₊ (`upper = true`) or u₋.
pub fn mu_residue(params: &StableParams, upper: bool) -> Result<Complex64> {
    require_mixture(params)?;
    let (a, r, rh) = (params.alpha(), params.rho(), params.rho_hat());
    let s = S2Evaluator::new(a)?.s2_real(a * r)?;
    let phase = PI * (a * r * rh / 2.0 + 1.5 * r - 1.0 / a);
    let sign = if upper { -1.0 } else { 1.0 };
    Ok(s / (2.0 * PI * a.sqrt()) * Complex64::from_polar(1.0, sign * phase))
}

/// Analyticity half-width in v = ln z of z ↦ μ(e^{−iβ} z), capped by the
/// strip where e^{−x e^v} stays bounded.
fn strip_width(p: &StableParams, beta: f64) -> f64 {
    let a = p.alpha();
    let pole = PI * (1.0 / a - p.rho());
    let eta = PI / a - PI * p.rho() + 2.0 * PI * (1.0f64).min(1.0 / a);
    [
        (beta - pole).abs(),
        (beta + pole).abs(),
        (beta - eta).abs(),
        (beta + eta).abs(),
        0.5 * PI,
    ]
    .into_iter()
    .fold(f64::INFINITY, f64::min)
}

/// Largest ln u put on a mixing grid.
pub(crate) const V_CAP: f64 = 700.0;

fn mixture_grid_spec(p: &StableParams, beta: f64) -> Result<LogGridSpec> {
    let a = p.alpha();
    let d = 0.8 * strip_width(p, beta);
    // |μ| ~ u^α at 0 and u^{−αρ} at ∞; a fitted power tail covers what lies
    // past the upper end, which for small αρ is where e^v would overflow
    let spec = LogGridSpec::from_tails(a, a * p.rho(), d, GRID_DIGITS)?;
    Ok(spec.cap_upper(V_CAP))
}

/// Density of X̄ at an Exp(1) time, tabulated once per parameter set.
#[derive(Debug, Clone)]
pub struct SupDensity {
    params: StableParams,
    mixture: Option<(LogGrid<f64>, PowerTail<f64>)>,
}

impl SupDensity {
    pub fn new(params: &StableParams) -> Result<Self> {
        if is_exponential(params) {
            return Ok(SupDensity {
                params: *params,
                mixture: None,
            });
        }
        let s2 = S2Evaluator::new(params.alpha())?;
        let spec = mixture_grid_spec(params, 0.0)?;
        let grid = LogGrid::build(spec, |u| mu_with(&s2, params, u))?;
        let tail = PowerTail::fit(&grid, spec.h, params.alpha() * params.rho());
        Ok(SupDensity {
            params: *params,
            mixture: Some((grid, tail)),
        })
    }

    /// Density of −X̲, i.e. of the supremum of the dual process.
    pub fn infimum(params: &StableParams) -> Result<Self> {
        Self::new(&params.dual())
    }

    pub fn params(&self) -> &StableParams {
        &self.params
    }

    /// f_X̄(x) for x > 0.
    pub fn density(&self, x: f64) -> f64 {
        match &self.mixture {
            None => (-x).exp(),
            Some((g, tail)) => g.laplace(x, 0) + tail.laplace(x, 0),
        }
    }

    /// f′_X̄(x).
    pub fn derivative(&self, x: f64) -> f64 {
        match &self.mixture {
            None => -(-x).exp(),
            Some((g, tail)) => g.laplace(x, 1) + tail.laplace(x, 1),
        }
    }

    /// ∫₀^∞ e^{−zx} f_X̄(x) dx from the mixture, i.e. the Stieltjes transform of μ.
    pub fn laplace(&self, z: Complex64) -> Complex64 {
        match &self.mixture {
            None => 1.0 / (1.0 + z),
            Some((g, tail)) => g.stieltjes(z) + tail.stieltjes(z),
        }
    }

    /// Total mass ∫μ(u)/u du.
    pub fn mass(&self) -> f64 {
        self.laplace(Complex64::new(0.0, 0.0)).re
    }
}

/// f_X̄ continued to the ray arg x = β by rotating the mixing contour.
#[derive(Debug, Clone)]
pub struct ContinuedSupDensity {
    beta: f64,
    kind: Continued,
}

#[derive(Debug, Clone)]
enum Continued {
    Exponential,
    Mixture {
        grid: LogGrid<Complex64>,
        tail: PowerTail<Complex64>,
        /// ∓2πi Res(μ, u∓) and the pole u∓, when the rotation sweeps past it.
        residue: Option<(Complex64, Complex64)>,
    },
}

impl ContinuedSupDensity {
    /// Prepares f_X̄(e^{iβ} y), |β| < π(1/α + ρ̂).
    pub fn new(params: &StableParams, beta: f64) -> Result<Self> {
        let a = params.alpha();
        let limit = PI * (1.0 / a + params.rho_hat());
        if beta.abs() >= limit {
            return Err(Error::domain(format!(
                "rotation angle {beta} is outside the sector |β| < {limit}"
            )));
        }
        if is_exponential(params) {
            return Ok(ContinuedSupDensity {
                beta,
                kind: Continued::Exponential,
            });
        }
        let pole = PI * (1.0 / a - params.rho());
        if ((beta.abs() - pole) / pole).abs() < 1e-6 {
            return Err(Error::PoleProximity(format!(
                "rotating by {beta} puts a pole of the mixing density on the contour"
            )));
        }
        let s2 = S2Evaluator::new(a)?;
        let spec = mixture_grid_spec(params, beta)?;
        let grid = LogGrid::build(spec, |z| {
            mu_analytic_with(&s2, params, SurfacePoint::new(z, -beta)?)
        })?;
        let tail = PowerTail::fit(&grid, spec.h, a * params.rho());
        let residue = if beta > pole {
            let (_, lower) = mu_poles(params);
            Some((
                -2.0 * PI * Complex64::i() * mu_residue(params, false)?,
                lower.to_complex(),
            ))
        } else if beta < -pole {
            let (upper, _) = mu_poles(params);
            Some((
                2.0 * PI * Complex64::i() * mu_residue(params, true)?,
                upper.to_complex(),
            ))
        } else {
            None
        };
        Ok(ContinuedSupDensity {
            beta,
            kind: Continued::Mixture { grid, tail, residue },
        })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// f_X̄(w) for any w with Re(w e^{−iβ}) > 0.
    pub fn eval_at(&self, w: Complex64) -> Complex64 {
        let rot = Complex64::from_polar(1.0, self.beta);
        let y = w / rot;
        match &self.kind {
            Continued::Exponential => (-w).exp(),
            Continued::Mixture { grid, residue, .. } => {
                // no tail correction here: meant for moderate |w|
                let mut v = grid.integrate_with(|u| (-y * u).exp()) / rot;
                if let Some((coef, pole)) = residue {
                    v += coef * (-pole * w).exp();
                }
                v
            }
        }
    }

    /// f_X̄(e^{iβ} y) for y > 0.
    pub fn eval(&self, y: f64) -> Complex64 {
        let rot = Complex64::from_polar(1.0, self.beta);
        match &self.kind {
            Continued::Exponential => (-rot * y).exp(),
            Continued::Mixture { grid, tail, residue } => {
                let mut v = (grid.laplace(y, 0) + tail.laplace(y, 0)) / rot;
                if let Some((coef, pole)) = residue {
                    v += coef * (-pole * rot * y).exp();
                }
                v
            }
        }
    }
}

/// e^{iπ/α} f_X̄(e^{iπ/α} x), prepared once per parameter set.
#[derive(Debug, Clone)]
pub struct RotatedSupDensity {
    inner: ContinuedSupDensity,
}

impl RotatedSupDensity {
    pub fn new(params: &StableParams) -> Result<Self> {
        if params.is_one_sided() {
            return Err(Error::domain("rotated density is not provided in one-sided mode"));
        }
        Ok(RotatedSupDensity {
            inner: ContinuedSupDensity::new(params, PI / params.alpha())?,
        })
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        Complex64::from_polar(1.0, self.inner.beta) * self.inner.eval(x)
    }
}

/// f_X̄(x) for one point; prefer [`SupDensity`] for repeated use.
pub fn sup_density(params: &StableParams, x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::domain(format!("x = {x} must be positive")));
    }
    Ok(SupDensity::new(params)?.density(x))
}

/// e^{iπ/α} f_X̄(e^{iπ/α} x) for one point.
///
/// For ρ > 1/2 this grows exponentially in x; it is meant for moderate x.
pub fn rotated_sup_density(params: &StableParams, x: f64) -> Result<Complex64> {
    if !(x > 0.0) {
        return Err(Error::domain(format!("x = {x} must be positive")));
    }
    Ok(RotatedSupDensity::new(params)?.eval(x))
}

/// Both extremum densities of one parameter set.
#[derive(Debug, Clone)]
pub struct ExtremumDensities {
    pub sup: SupDensity,
    pub inf: SupDensity,
}

impl ExtremumDensities {
    pub fn new(params: &StableParams) -> Result<Self> {
        Ok(ExtremumDensities {
            sup: SupDensity::new(params)?,
            inf: SupDensity::infimum(params)?,
        })
    }

    fn alpha(&self) -> f64 {
        self.sup.params().alpha()
    }

    /// H_q(x, y, z) = q^{2/α} f_X̄((y−z) q^{1/α}) f_X̲((x−z) q^{1/α}).
    pub fn h_q(&self, q: f64, x: f64, y: f64, z: f64) -> Result<f64> {
        if !(q > 0.0) {
            return Err(Error::domain(format!("q = {q} must be positive")));
        }
        if !(z < x.min(y)) {
            return Err(Error::domain(format!("z = {z} must be below min(x, y)")));
        }
        let s = q.powf(1.0 / self.alpha());
        Ok(s * s * self.sup.density((y - z) * s) * self.inf.density((x - z) * s))
    }

    /// r_q(x, y) = q^{−1} ∫₀^{min(x,y)} H_q(x, y, z) dz.
    pub fn resolvent(&self, q: f64, x: f64, y: f64, tol: f64) -> Result<f64> {
        if !(q > 0.0 && x > 0.0 && y > 0.0) {
            return Err(Error::domain("resolvent needs q, x, y > 0"));
        }
        let a = self.alpha();
        if x == y && a <= 1.0 {
            // the two endpoint singularities add up to (m−z)^{α−2}
            return Err(Error::NotIntegrable(format!(
                "at x = y the z-integrand behaves like (x−z)^{} and α = {a} ≤ 1",
                a - 2.0
            )));
        }
        let m = x.min(y);
        let s = q.powf(1.0 / a);
        // integrate in w = min(x,y) − z so the singular end sits at the origin
        let r = tanh_sinh(
            |w: f64| {
                // y − z and x − z without cancellation near the singular end
                let (dy, dx) = ((y - m) + w, (x - m) + w);
                s * s * self.sup.density(dy * s) * self.inf.density(dx * s)
            },
            0.0,
            m,
            tol,
        );
        Ok(r.into_result("resolvent z-integral")? / q)
    }
}

/// Joint density of (X_{e(q)}, X̲_{e(q)}) started at x.
pub fn h_q_density(params: &StableParams, q: f64, x: f64, y: f64, z: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::domain(format!("x = {x} must be positive")));
    }
    ExtremumDensities::new(params)?.h_q(q, x, y, z)
}

/// Kernel r_q(x, y) of the resolvent of the killed process.
pub fn resolvent_density(params: &StableParams, q: f64, x: f64, y: f64) -> Result<f64> {
    ExtremumDensities::new(params)?.resolvent(q, x, y, 1e-11)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{integrate_semi_infinite, IntegrandProfile};
    use crate::stable_model::psi;

    fn p(a: f64, r: f64) -> StableParams {
        StableParams::new(a, r).unwrap()
    }

    #[test]
    fn phi_limits_and_brownian_case() {
        let pr = p(1.5, 0.55);
        let v = phi(&pr, Extremum::Supremum, Complex64::new(1e-6, 0.0)).unwrap();
        assert!((v.re - 1.0).abs() < 1e-4 && v.im.abs() < 1e-12);
        let bm = p(2.0, 0.5);
        for &z in &[0.5, 1.0, 2.0] {
            let v = phi(&bm, Extremum::Supremum, Complex64::new(z, 0.0)).unwrap();
            assert!((v.re - 1.0 / (1.0 + z)).abs() < 1e-8);
        }
        let z = Complex64::new(0.7, 1.3);
        let f = WhFactor::new(pr, Extremum::Supremum).unwrap();
        assert!((f.eval_complex(z.conj()).unwrap() - f.eval_complex(z).unwrap().conj()).norm() < 1e-13);
        assert!(f.eval(SurfacePoint::new(1.0, 3.6).unwrap()).is_err());
    }

    #[test]
    fn factorization_identity() {
        for &(a, r) in &[(0.8, 0.5), (1.3, 0.55), (1.7, 0.45)] {
            let pr = p(a, r);
            let up = WhFactor::new(pr, Extremum::Supremum).unwrap();
            let down = WhFactor::new(pr, Extremum::Infimum).unwrap();
            for k in 0..41 {
                let z = -50.0 + 2.5 * k as f64 + 0.123;
                let v = up.eval_complex(Complex64::new(0.0, -z)).unwrap()
                    * down.eval_complex(Complex64::new(0.0, z)).unwrap()
                    * (1.0 + psi(&pr, z));
                assert!((v - 1.0).norm() < 1e-8, "({a},{r}) z={z}: {v}");
            }
        }
    }

    #[test]
    fn mu_asymptotics_and_stieltjes() {
        let pr = p(1.5, 0.55);
        let cc = (PI * 1.5 * 0.55).sin() / PI;
        let small = mu_density(&pr, 1e-8).unwrap() / 1e-8f64.powf(1.5);
        assert!((small / cc - 1.0).abs() < 0.01, "{small}");
        let big = mu_density(&pr, 1e8).unwrap() / 1e8f64.powf(-1.5 * 0.55);
        assert!((big / cc - 1.0).abs() < 0.01, "{big}");
        let sd = SupDensity::new(&pr).unwrap();
        let phi1 = phi(&pr, Extremum::Supremum, Complex64::new(1.0, 0.0)).unwrap();
        assert!((sd.laplace(Complex64::new(1.0, 0.0)) - phi1).norm() < 1e-12);
        assert!((sd.mass() - 1.0).abs() < 1e-12, "{}", sd.mass());
        assert!(mu_density(&p(2.0, 0.5), 1.0).is_err());
    }

    #[test]
    fn mu_residues_match_closed_form() {
        let pr = p(1.5, 0.55);
        let (up, lo) = mu_poles(&pr);
        for (pole, upper) in [(up, true), (lo, false)] {
            let eps = 1e-7;
            let u = SurfacePoint::new(1.0 + eps, pole.argument()).unwrap();
            let near = (u.to_complex() - pole.to_complex()) * mu_analytic(&pr, u).unwrap();
            let r = mu_residue(&pr, upper).unwrap();
            assert!((near - r).norm() < 1e-6 * r.norm().max(1.0), "{near} vs {r}");
        }
    }

    #[test]
    fn normalization_and_laplace_by_quadrature() {
        let pr = p(1.5, 0.55);
        let sd = SupDensity::new(&pr).unwrap();
        let prof = IntegrandProfile::power(-2.5).with_endpoint_singularity(1.5 * 0.55 - 1.0);
        let mass = integrate_semi_infinite(|x| sd.density(x), prof, 1e-10).unwrap();
        assert!((mass.value - 1.0).abs() < 1e-6, "{:?}", mass);
        let lap = integrate_semi_infinite(|x| (-x).exp() * sd.density(x), IntegrandProfile::exponential(1.0), 1e-10).unwrap();
        let phi1 = phi(&pr, Extremum::Supremum, Complex64::new(1.0, 0.0)).unwrap().re;
        assert!((lap.value - phi1).abs() < 1e-6);
    }

    #[test]
    fn brownian_and_one_sided_sup_is_exponential() {
        for &x in &[0.5, 1.0, 2.0] {
            assert!((sup_density(&p(2.0, 0.5), x).unwrap() - (-x).exp()).abs() < 1e-12);
        }
        let v = rotated_sup_density(&p(2.0, 0.5), 1.3).unwrap();
        assert!((v - Complex64::i() * Complex64::new(0.0, -1.3).exp()).norm() < 1e-14);
        assert!((v.norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn small_x_power_law() {
        // f(x) ~ c Γ(1−αρ) x^{αρ−1} with c = sin(παρ)/π
        let pr = p(1.5, 0.55);
        let sd = SupDensity::new(&pr).unwrap();
        let ar = 1.5 * 0.55;
        let c = (PI * ar).sin() / PI * statrs::function::gamma::gamma(1.0 - ar);
        for &x in &[1e-12, 1e-15, 1e-20] {
            let r = sd.density(x) / (c * x.powf(ar - 1.0));
            assert!((r - 1.0).abs() < 1e-3, "{x}: {r}");
        }
    }

    #[test]
    fn completely_monotone_on_grid() {
        let sd = SupDensity::new(&p(1.3, 0.55)).unwrap();
        let xs: Vec<f64> = (0..40).map(|k| 10f64.powf(-2.0 + 0.1 * k as f64)).collect();
        for w in xs.windows(3) {
            let (f0, f1, f2) = (sd.density(w[0]), sd.density(w[1]), sd.density(w[2]));
            assert!(f0 > 0.0 && f1 < f0 && f2 < f1);
            // convexity on a non-uniform grid
            let s1 = (f1 - f0) / (w[1] - w[0]);
            let s2 = (f2 - f1) / (w[2] - w[1]);
            assert!(s2 > s1);
        }
    }

    #[test]
    fn continuation_matches_real_axis_and_conjugates() {
        let pr = p(1.5, 0.55);
        let sd = SupDensity::new(&pr).unwrap();
        // a small rotation that stays below the pole reproduces the real-axis values
        let small = ContinuedSupDensity::new(&pr, 0.0).unwrap();
        assert!((small.eval(0.8).re - sd.density(0.8)).abs() < 1e-12);
        // f(e^{iβ} y) is analytic: compare two rotations at the same point
        let b1 = ContinuedSupDensity::new(&pr, 0.5).unwrap();
        let b2 = ContinuedSupDensity::new(&pr, 1.2).unwrap();
        let w = Complex64::from_polar(1.1, 0.9);
        let v1 = b1.eval_at(w);
        let v2 = b2.eval_at(w);
        assert!((v1 - v2).norm() < 1e-10, "{v1} vs {v2}");
        let plus = ContinuedSupDensity::new(&pr, PI / 1.5).unwrap().eval(0.7);
        let minus = ContinuedSupDensity::new(&pr, -PI / 1.5).unwrap().eval(0.7);
        assert!((plus - minus.conj()).norm() < 1e-12);
    }

    #[test]
    fn h_q_and_resolvent() {
        let pr = p(1.5, 0.55);
        let d = ExtremumDensities::new(&pr).unwrap();
        let v = d.h_q(1.0, 1.0, 1.5, 0.2).unwrap();
        let manual = d.sup.density(1.3) * d.inf.density(0.8);
        assert!((v - manual).abs() < 1e-15);
        // scaling of the factorized form
        let q: f64 = 2.3;
        let s = q.powf(1.0 / 1.5);
        let lhs = d.h_q(q, 1.0, 1.5, 0.2).unwrap();
        let rhs = s * s * d.h_q(1.0, s, 1.5 * s, 0.2 * s).unwrap();
        assert!((lhs / rhs - 1.0).abs() < 1e-13);
        assert!(d.h_q(1.0, 1.0, 1.5, 1.0).is_err());
        // Hunt duality for the resolvent
        let dual = ExtremumDensities::new(&pr.dual()).unwrap();
        let r1 = d.resolvent(1.0, 1.0, 1.5, 1e-11).unwrap();
        let r2 = dual.resolvent(1.0, 1.5, 1.0, 1e-11).unwrap();
        assert!((r1 - r2).abs() < 1e-10 * r1);
        let tiny = d.resolvent(1.0, 1e-6, 1.5, 1e-12).unwrap();
        assert!(tiny < 1e-3 * r1);
        assert!(d.resolvent(1.0, 1.2, 1.2, 1e-10).unwrap() > 0.0);
        let low = ExtremumDensities::new(&p(0.8, 0.5)).unwrap();
        assert!(matches!(low.resolvent(1.0, 1.0, 1.0, 1e-8), Err(Error::NotIntegrable(_))));
    }
}
