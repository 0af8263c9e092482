use std::f64::consts::PI;

use num_complex::Complex64;

use super::Scalar;
use crate::error::{Error, Result};

/// Where to place a [`LogGrid`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogGridSpec {
    pub v_min: f64,
    pub v_max: f64,
    pub h: f64,
}

impl LogGridSpec {
    /// Picks truncation and step from tail exponents and analyticity.
    ///
    /// The integrand in v = ln u is assumed to behave like e^{lower·v} as
    /// v → −∞ and e^{-upper·v} as v → +∞ (both exponents positive), and to be
    /// analytic in the strip |Im v| < `half_width`. `digits` is the number of
    /// correct digits asked of the trapezoid rule.
    pub fn from_tails(lower: f64, upper: f64, half_width: f64, digits: f64) -> Result<Self> {
        if !(lower > 0.0 && upper > 0.0 && half_width > 0.0) {
            return Err(Error::domain(format!(
                "log grid needs positive tail exponents and strip width, got {lower}, {upper}, {half_width}"
            )));
        }
        let budget = digits * std::f64::consts::LN_10;
        // trapezoid error ~ exp(-2π d / h)
        let h = (2.0 * PI * half_width / (budget + 3.0)).min(0.25);
        Ok(LogGridSpec {
            v_min: -(budget + 2.0) / lower,
            v_max: (budget + 2.0) / upper,
            h,
        })
    }

    /// Stops the grid at v = `v_cap` when a fitted tail covers the rest.
    pub fn cap_upper(self, v_cap: f64) -> Self {
        LogGridSpec {
            v_max: self.v_max.min(v_cap),
            ..self
        }
    }
}

/// Trapezoid rule in v = ln u for integrals ∫₀^∞ k(u) φ(u) du.
///
/// φ is tabulated once; kernels such as e^{-xu} or 1/(u+z) are applied at
/// evaluation time, so a Laplace or Stieltjes transform of φ costs one pass
/// over the nodes. Nodes sit at half-integer multiples of h, which keeps
/// u = 1 off the grid.
#[derive(Debug, Clone)]
pub struct LogGrid<T> {
    u: Vec<f64>,
    w: Vec<T>,
}

impl<T: Scalar> LogGrid<T> {
    pub fn build(spec: LogGridSpec, phi: impl Fn(f64) -> Result<T>) -> Result<Self> {
        let LogGridSpec { v_min, v_max, h } = spec;
        if !(h > 0.0 && v_max > v_min) {
            return Err(Error::domain("empty log grid"));
        }
        let k_lo = (v_min / h).floor() as i64;
        let k_hi = (v_max / h).ceil() as i64;
        let n = (k_hi - k_lo + 1) as usize;
        let mut u = Vec::with_capacity(n);
        let mut w = Vec::with_capacity(n);
        for k in k_lo..=k_hi {
            let v = (k as f64 + 0.5) * h;
            let uk = v.exp();
            let val = phi(uk)?;
            if !val.finite() {
                return Err(Error::NonConvergence {
                    what: format!("tabulated integrand at u = {uk:e}"),
                    estimate: val.magnitude(),
                    error: f64::INFINITY,
                });
            }
            u.push(uk);
            w.push(val * (uk * h));
        }
        Ok(LogGrid { u, w })
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    /// Nodes u_k with their weights h·u_k·φ(u_k).
    pub fn nodes(&self) -> impl Iterator<Item = (f64, T)> + '_ {
        self.u.iter().copied().zip(self.w.iter().copied())
    }

    /// ∫ φ(u) du.
    pub fn total(&self) -> T {
        self.w.iter().fold(T::default(), |acc, &w| acc + w)
    }

    /// ∫ e^{-xu} (-u)^order φ(u) du for real x ≥ 0.
    pub fn laplace(&self, x: f64, order: u32) -> T {
        let mut acc = T::default();
        for (&u, &w) in self.u.iter().zip(&self.w) {
            let e = x * u;
            if e > 745.0 {
                break;
            }
            let mut term = w * (-e).exp();
            for _ in 0..order {
                term = term * (-u);
            }
            acc = acc + term;
        }
        acc
    }

    /// ∫ g(u) φ(u) du for an arbitrary kernel.
    pub fn integrate_with<K: Scalar>(&self, g: impl Fn(f64) -> K) -> K
    where
        T: Into<K>,
    {
        let mut acc = K::default();
        for (&u, &w) in self.u.iter().zip(&self.w) {
            acc = acc + g(u) * w.into();
        }
        acc
    }
}

impl LogGrid<f64> {
    /// ∫ φ(u)/(u+z) du.
    pub fn stieltjes(&self, z: Complex64) -> Complex64 {
        // w/(u+z) as (w/u)/(1+z/u): complex division squares |u+z|, which
        // overflows long before u does
        self.u
            .iter()
            .zip(&self.w)
            .fold(Complex64::new(0.0, 0.0), |acc, (&u, &w)| acc + (w / u) / (1.0 + z / u))
    }
}

impl LogGrid<Complex64> {
    /// ∫ e^{-xu} φ(u) du for real x ≥ 0.
    pub fn laplace_c(&self, x: f64) -> Complex64 {
        self.laplace(x, 0)
    }
}

/// c·u^{−p} continuation of a tabulated mixing density beyond its last node.
#[derive(Debug, Clone, Copy)]
pub(crate) struct PowerTail<T> {
    start: f64,
    coef: T,
    p: f64,
}

impl<T: Scalar> PowerTail<T> {
    pub(crate) fn fit(grid: &LogGrid<T>, h: f64, p: f64) -> Self {
        let (u, w) = grid.nodes().last().expect("grid is never empty");
        // weights are h·u·μ(u); the midpoint cell ends half a step above u
        let coef = w * (u.powf(p) / (h * u));
        PowerTail {
            start: u * (0.5 * h).exp(),
            coef,
            p,
        }
    }

    /// ∫_start^∞ e^{−xu} (−u)^order c u^{−p} du.
    pub(crate) fn laplace(&self, x: f64, order: u32) -> T {
        let t = x * self.start;
        if t > 700.0 {
            return T::default();
        }
        let s = 1.0 + order as f64 - self.p;
        let sign = if order.is_multiple_of(2) { 1.0 } else { -1.0 };
        let factor = if x == 0.0 {
            if s < 0.0 {
                self.start.powf(s) / -s
            } else {
                f64::INFINITY
            }
        } else {
            x.powf(-s) * upper_gamma(s, t)
        };
        self.coef * (sign * factor)
    }
}

impl PowerTail<f64> {
    /// ∫_start^∞ c u^{−p} / (u + z) du for z off the negative axis.
    ///
    /// With t = start/u and w = z/start this is c start^{−p} ∫₀¹ t^{p−1}/(1 + wt) dt,
    /// and 1/(1+wt) = 1 − wt/(1+wt) leaves a smooth integrand.
    pub(crate) fn stieltjes(&self, z: Complex64) -> Complex64 {
        let w = z / self.start;
        let rest = super::quadrature::tanh_sinh(|t: f64| t.powf(self.p) / (1.0 + w * t), 0.0, 1.0, 1e-15).value;
        self.coef * self.start.powf(-self.p) * (1.0 / self.p - w * rest)
    }
}

impl<T: Scalar> PowerTail<T> {
    /// ∫_start^∞ (e^{−xu} − 1) c u^{−p} du for p > 1, free of cancellation.
    pub(crate) fn increment(&self, x: f64) -> T {
        debug_assert!(self.p > 1.0);
        let s = 1.0 - self.p;
        let t = x * self.start;
        if t == 0.0 {
            return T::default();
        }
        let v = (x.powf(-s) * upper_gamma(s + 1.0, t) - self.start.powf(s) * (-t).exp_m1()) / s;
        self.coef * v
    }
}

/// Γ(s, t) for real s and t > 0, by the upward recurrence for s ≤ 0.
fn upper_gamma(s: f64, t: f64) -> f64 {
    use statrs::function::gamma::gamma_ui;
    if s > 0.0 {
        gamma_ui(s, t)
    } else if s == 0.0 {
        exp_integral_e1(t)
    } else {
        (upper_gamma(s + 1.0, t) - t.powf(s) * (-t).exp()) / s
    }
}

/// E₁(t) by its series or continued fraction.
pub(crate) fn exp_integral_e1(t: f64) -> f64 {
    if t < 1.0 {
        let mut sum = 0.0;
        let mut term = 1.0;
        for k in 1..60 {
            term *= -t / k as f64;
            sum -= term / k as f64;
        }
        -0.577_215_664_901_532_9 - t.ln() + sum
    } else {
        let mut f = 0.0;
        for k in (1..80).rev() {
            let k = k as f64;
            f = k / (1.0 + k / (t + f));
        }
        (-t).exp() / (t + f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn upper_gamma_at_negative_integers() {
        for t in [0.05f64, 0.7, 3.0] {
            let want = (-t).exp() / t - exp_integral_e1(t);
            assert!((upper_gamma(-1.0, t) - want).abs() < 1e-12 * want.abs().max(1.0), "{t}");
        }
        // Γ(−1/2, t) = 2 e^{−t}/√t − 2 Γ(1/2, t)
        let t: f64 = 1.3;
        let want = 2.0 * (-t).exp() / t.sqrt() - 2.0 * statrs::function::gamma::gamma_ui(0.5, t);
        assert!((upper_gamma(-0.5, t) - want).abs() < 1e-13);
    }

    #[test]
    fn gamma_density_moments() {
        // φ(u) = u e^{-u}: ∫ e^{-xu} φ = 1/(1+x)²
        let spec = LogGridSpec::from_tails(2.0, 1.0, 1.5, 15.0).unwrap();
        let spec = LogGridSpec { v_max: 5.0, ..spec };
        let g = LogGrid::build(spec, |u| Ok(u * (-u).exp())).unwrap();
        for &x in &[0.0, 0.5, 3.0] {
            let v = g.laplace(x, 0);
            assert!((v - 1.0 / (1.0 + x).powi(2)).abs() < 1e-13, "{x}: {v}");
            let d = g.laplace(x, 1);
            assert!((d + 2.0 / (1.0 + x).powi(3)).abs() < 1e-12, "{x}: {d}");
        }
    }

    #[test]
    fn stieltjes_of_power_law() {
        // φ(u) = u^{-1/2}/π: ∫ φ/(u+z) du = z^{-1/2}
        let spec = LogGridSpec::from_tails(0.5, 0.5, 1.5, 14.0).unwrap();
        let g = LogGrid::build(spec, |u| Ok(u.powf(-0.5) / PI)).unwrap();
        let z = Complex64::new(2.0, 1.0);
        assert!((g.stieltjes(z) - z.powf(-0.5)).norm() < 1e-12);
    }

    #[test]
    fn exponential_integral_and_power_tail() {
        assert!((exp_integral_e1(0.5) - 0.559_773_594_776_160_8).abs() < 1e-14);
        assert!((exp_integral_e1(2.0) - 0.048_900_510_708_061_12).abs() < 1e-15);
        // ∫_1^∞ e^{-xu} u^{-1/2} du at x = 0.7, reference values from mpmath
        let t = PowerTail { start: 1.0, coef: 1.0, p: 0.5 };
        let x: f64 = 0.7;
        assert!((t.laplace(x, 0) - 0.501_495_937_502_024).abs() < 1e-14);
        // p > 1 goes through the recurrence: ∫_1^∞ e^{-xu} u^{-3/2} du
        let t = PowerTail { start: 1.0, coef: 1.0, p: 1.5 };
        assert!((t.laplace(x, 0) - 0.291_076_295_079_986).abs() < 1e-14);
        assert!((t.laplace(0.0, 0) - 2.0).abs() < 1e-15);
        let inc = t.increment(x);
        assert!((inc - (t.laplace(x, 0) - 2.0)).abs() < 1e-14);
        // x → 0: ∫_1^∞ (e^{−xu} − 1) u^{−3/2} du ≈ −2√(πx)
        let x = 1e-30;
        assert!((t.increment(x) / (-2.0 * (PI * x).sqrt()) - 1.0).abs() < 1e-10);
    }
}
