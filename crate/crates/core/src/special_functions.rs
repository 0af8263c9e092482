//! The double sine function S₂(z; α) and the finite products it reduces to.
//!
//! S₂ is fixed by S₂(z+1) = S₂(z)/(2 sin(πz/α)), S₂(z+α) = S₂(z)/(2 sin πz)
//! and S₂((1+α)/2) = 1. Inside a window of the fundamental strip we use
//!
//! ln S₂(z) = −∫₀^∞ [ sinh(wt) / (2 sinh t sinh αt) − w/(2αt) ] dt/t,  w = 1+α−2z,
//!
//! rewritten as two contour integrals on horizontal lines Im t = ∓δ, where
//! the integrands decay exponentially in both directions and the trapezoid
//! rule converges geometrically. Everything else is reached through the
//! functional equations.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{ln_two_sin_pi, sin_pi, LogGrid, LogGridSpec};

/// Distance from a pole below which s2 refuses to answer.
pub const POLE_EXCLUSION_RADIUS: f64 = 1e-8;
/// Longest chain of functional-equation steps we are willing to take.
pub const MAX_LADDER_STEPS: usize = 10_000;

/// Half-width of the trapezoid window in the shifted variable.
const CONTOUR_RANGE: f64 = 40.0;

/// A point e^{ln r + iθ} of the Riemann surface of the logarithm.
///
/// Keeping the argument unreduced makes ln single valued, which matters for
/// analytic continuations such as f(e^{iπ/α} x).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurfacePoint {
    modulus: f64,
    argument: f64,
}

impl SurfacePoint {
    pub fn new(modulus: f64, argument: f64) -> Result<Self> {
        if !(modulus > 0.0) || !modulus.is_finite() || !argument.is_finite() {
            return Err(Error::domain(format!(
                "surface point needs a finite positive modulus, got {modulus} with argument {argument}"
            )));
        }
        Ok(SurfacePoint { modulus, argument })
    }

    /// Positive real point.
    pub fn real(x: f64) -> Result<Self> {
        Self::new(x, 0.0)
    }

    /// Principal-branch lift of a nonzero complex number.
    pub fn from_complex(z: Complex64) -> Result<Self> {
        Self::new(z.norm(), z.arg())
    }

    pub fn modulus(&self) -> f64 {
        self.modulus
    }

    pub fn argument(&self) -> f64 {
        self.argument
    }

    pub fn ln(&self) -> Complex64 {
        Complex64::new(self.modulus.ln(), self.argument)
    }

    /// e^{ic}·self; the argument moves by exactly c.
    pub fn rotate(&self, c: f64) -> Self {
        SurfacePoint {
            modulus: self.modulus,
            argument: self.argument + c,
        }
    }

    pub fn scale(&self, r: f64) -> Result<Self> {
        Self::new(self.modulus * r, self.argument)
    }

    /// self^p on this sheet.
    pub fn powf(&self, p: f64) -> Complex64 {
        (self.ln() * p).exp()
    }

    pub fn to_complex(&self) -> Complex64 {
        Complex64::from_polar(self.modulus, self.argument)
    }
}

/// Evaluator of S₂(·; α) with the contour kernel precomputed.
///
/// Immutable after construction, so one instance can serve many threads.
#[derive(Debug, Clone)]
pub struct S2Evaluator {
    alpha: f64,
    h: f64,
    /// Nodes t_k = kh − iδ.
    nodes: Vec<Complex64>,
    /// 1/(4 t sinh t sinh αt) at the nodes.
    kernel: Vec<Complex64>,
}

impl S2Evaluator {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 2.0) {
            return Err(Error::domain(format!("alpha = {alpha} is outside (0, 2]")));
        }
        // nearest singularities of the kernel off the real axis sit at ±iπ/max(1,α)
        let delta = 0.5 * PI / alpha.max(1.0);
        let h = PI * delta / 20.0;
        let n = (CONTOUR_RANGE / h) as i64 + 1;
        let (nodes, kernel) = (-n..=n)
            .map(|k| {
                let t = Complex64::new(k as f64 * h, -delta);
                (t, 1.0 / (4.0 * t * t.sinh() * (t * alpha).sinh()))
            })
            .unzip();
        Ok(S2Evaluator {
            alpha,
            h,
            nodes,
            kernel,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// The open strip 0 < Re z < 1+α where S₂ is analytic and zero free.
    pub fn fundamental_strip(&self) -> (f64, f64) {
        (0.0, 1.0 + self.alpha)
    }

    /// ln S₂ on a window inside the fundamental strip, Im z ≥ 0.
    fn ln_window_upper(&self, z: Complex64) -> Complex64 {
        let a = self.alpha;
        let w = 1.0 + a - 2.0 * z;
        let mut upper = Complex64::new(0.0, 0.0);
        let mut lower = Complex64::new(0.0, 0.0);
        for (&t, &k) in self.nodes.iter().zip(&self.kernel) {
            upper += k * (w * t).exp();
            lower += k.conj() * (-w * t.conj()).exp();
        }
        let polar = Complex64::i() * PI * (3.0 * w * w - 1.0 - a * a) / (24.0 * a);
        polar - 0.5 * self.h * (upper - lower)
    }

    fn ln_window(&self, z: Complex64) -> Complex64 {
        if z.im < 0.0 {
            self.ln_window_upper(z.conj()).conj()
        } else {
            self.ln_window_upper(z)
        }
    }

    /// Distance check against the pole lattice {m + αn : m, n ≥ 1}.
    pub fn check_pole(&self, z: Complex64) -> Result<()> {
        if z.im.abs() >= POLE_EXCLUSION_RADIUS || z.re < 1.0 + self.alpha - POLE_EXCLUSION_RADIUS {
            return Ok(());
        }
        let mut n = 1;
        while self.alpha * n as f64 <= z.re {
            let m = (z.re - self.alpha * n as f64).round();
            if m >= 1.0 {
                let p = m + self.alpha * n as f64;
                if (z - p).norm() < POLE_EXCLUSION_RADIUS {
                    return Err(Error::PoleProximity(format!(
                        "z = {z} is within {POLE_EXCLUSION_RADIUS:e} of the pole {m} + {}·{n}",
                        self.alpha
                    )));
                }
            }
            n += 1;
        }
        Ok(())
    }

    /// ln S₂(z; α), branch chosen by the ladder. Exact zeros give −∞.
    pub fn ln_s2(&self, z: Complex64) -> Result<Complex64> {
        if !(z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::domain(format!("non-finite argument {z}")));
        }
        self.check_pole(z)?;
        let a = self.alpha;
        // window of width one step, centred in the strip
        let (lo, hi, step) = if a >= 1.0 {
            (a / 2.0, 1.0 + a / 2.0, 1.0)
        } else {
            (0.5, 0.5 + a, a)
        };
        let factor = |z: Complex64| {
            if a >= 1.0 {
                ln_two_sin_pi(z / a)
            } else {
                ln_two_sin_pi(z)
            }
        };
        let steps = if z.re > hi {
            ((z.re - hi) / step).ceil()
        } else if z.re < lo {
            ((lo - z.re) / step).ceil()
        } else {
            0.0
        };
        if steps > MAX_LADDER_STEPS as f64 {
            return Err(Error::domain(format!(
                "reducing z = {z} to the fundamental strip needs {steps} steps (limit {MAX_LADDER_STEPS})"
            )));
        }
        let mut z = z;
        let mut acc = Complex64::new(0.0, 0.0);
        while z.re > hi {
            z -= step;
            acc -= factor(z);
        }
        while z.re < lo {
            acc += factor(z);
            z += step;
        }
        Ok(acc + self.ln_window(z))
    }

    /// S₂(z; α). Real z gives a real result.
    pub fn s2(&self, z: Complex64) -> Result<Complex64> {
        let l = self.ln_s2(z)?;
        let v = if l.re == f64::NEG_INFINITY {
            Complex64::new(0.0, 0.0)
        } else {
            l.exp()
        };
        if z.im == 0.0 {
            Ok(Complex64::new(v.re, 0.0))
        } else {
            Ok(v)
        }
    }

    pub fn s2_real(&self, x: f64) -> Result<f64> {
        Ok(self.s2(Complex64::new(x, 0.0))?.re)
    }

    /// ln |S₂(b + iα ln(e^{ic}y)/(2π)) S₂(b − iα ln(e^{ic}y)/(2π))|.
    pub fn ln_abs_pair(&self, b: f64, point: SurfacePoint) -> Result<f64> {
        let shift = Complex64::i() * self.alpha * point.ln() / (2.0 * PI);
        Ok((self.ln_s2(b + shift)? + self.ln_s2(b - shift)?).re)
    }

    /// The pair product above, exponentiated. For c = 0 it is |S₂(b + iα ln y/(2π))|².
    pub fn abs_squared_on_ray(&self, b: f64, c: f64, y: f64) -> Result<f64> {
        let p = SurfacePoint::new(y, c)?;
        Ok(self.ln_abs_pair(b, p)?.exp())
    }

    /// S₂(b + iα ln u/(2π)) S₂(b − iα ln u/(2π)) on any sheet.
    pub fn pair(&self, b: f64, u: SurfacePoint) -> Result<Complex64> {
        let shift = Complex64::i() * self.alpha * u.ln() / (2.0 * PI);
        let l = self.ln_s2(b + shift)? + self.ln_s2(b - shift)?;
        Ok(if l.re == f64::NEG_INFINITY {
            Complex64::new(0.0, 0.0)
        } else {
            l.exp()
        })
    }

    /// Residual of the special values S₂(1) = √α and S₂(1/2) = √2.
    ///
    /// Guards the sign convention of the integral representation.
    pub fn special_value_residual(&self) -> Result<f64> {
        let r1 = (self.s2_real(1.0)? / self.alpha.sqrt() - 1.0).abs();
        let r2 = (self.s2_real(0.5)? / 2f64.sqrt() - 1.0).abs();
        let r3 = (self.s2_real(0.5 * (1.0 + self.alpha))? - 1.0).abs();
        Ok(r1.max(r2).max(r3))
    }
}

/// S₂(z; α).
pub fn s2(z: Complex64, alpha: f64) -> Result<Complex64> {
    S2Evaluator::new(alpha)?.s2(z)
}

/// |S₂(b + iα ln(e^{ic}y)/(2π)) S₂(b − iα ln(e^{ic}y)/(2π))|, computed from log-magnitudes.
pub fn s2_abs_squared_on_ray(b: f64, c: f64, y: f64, alpha: f64) -> Result<f64> {
    S2Evaluator::new(alpha)?.abs_squared_on_ray(b, c, y)
}

/// (a; q)_n with the reciprocal branch for negative n.
pub fn q_pochhammer(a: Complex64, q: Complex64, n: i64) -> Result<Complex64> {
    let one = Complex64::new(1.0, 0.0);
    if n >= 0 {
        let mut qj = one;
        let mut p = one;
        for _ in 0..n {
            p *= one - a * qj;
            qj *= q;
        }
        Ok(p)
    } else {
        let qinv = one / q;
        let mut qj = qinv;
        let mut p = one;
        for j in 1..=n.unsigned_abs() {
            let f = one - a * qj;
            if f.norm() < 1e-14 {
                return Err(Error::DivisionByZero(format!(
                    "factor 1 - a q^-{j} vanishes in (a; q)_{n}"
                )));
            }
            p /= f;
            qj *= qinv;
        }
        Ok(p)
    }
}

/// S₂(z)/S₂(z + m − nα) as a finite product of sines.
pub fn s2_shift_ratio(z: Complex64, m: u32, n: u32, alpha: f64) -> Result<Complex64> {
    if !(alpha > 0.0 && alpha <= 2.0) {
        return Err(Error::domain(format!("alpha = {alpha} is outside (0, 2]")));
    }
    let mut p = Complex64::new(if (m * n).is_multiple_of(2) { 1.0 } else { -1.0 }, 0.0);
    for j in 1..=m {
        p *= 2.0 * sin_pi((z + (j - 1) as f64) / alpha);
    }
    for j in 1..=n {
        let d = 2.0 * sin_pi(z - j as f64 * alpha);
        if d.norm() < 1e-14 {
            return Err(Error::DivisionByZero(format!(
                "2 sin(π(z - {j}α)) vanishes at z = {z}"
            )));
        }
        p /= d;
    }
    Ok(p)
}

/// Relative residual of the b-beta integral
/// ∫₀^∞ x^{s−1} |S₂(1/2 + α/2 + b + iα ln x/(2π))|² dx = (2π/√α) S₂(2b)/(S₂(b+s) S₂(b−s)).
pub fn tau_binomial_check(b: f64, s: f64, alpha: f64) -> Result<f64> {
    let (lhs, rhs) = tau_binomial_sides(b, s, alpha)?;
    Ok(((lhs - rhs) / rhs).abs())
}

/// Both sides of the b-beta identity: quadrature first, closed form second.
pub fn tau_binomial_sides(b: f64, s: f64, alpha: f64) -> Result<(f64, f64)> {
    if !(b > 0.0 && b < 0.5 * (1.0 + alpha)) {
        return Err(Error::domain(format!(
            "b = {b} must lie in (0, (1+α)/2) = (0, {})",
            0.5 * (1.0 + alpha)
        )));
    }
    if !(s > -b && s < b) {
        return Err(Error::domain(format!("s = {s} must lie in (-b, b) with b = {b}")));
    }
    let ev = S2Evaluator::new(alpha)?;
    let c = 0.5 + 0.5 * alpha + b;
    // In v = ln x the integrand decays like e^{(s+b)v} and e^{(s−b)v}; its nearest
    // singularities sit at |Im v| = 2π((1+α)/2 − b)/α.
    let width = 2.0 * PI * (0.5 * (1.0 + alpha) - b) / alpha;
    let spec = LogGridSpec::from_tails(b + s, b - s, 0.8 * width.min(PI), 15.0)?;
    let grid = LogGrid::build(spec, |x| {
        Ok(x.powf(s - 1.0) * ev.abs_squared_on_ray(c, 0.0, x)?)
    })?;
    let lhs = grid.total();
    let rhs = 2.0 * PI / alpha.sqrt() * ev.s2_real(2.0 * b)?
        / (ev.s2_real(b + s)? * ev.s2_real(b - s)?);
    Ok((lhs, rhs))
}
