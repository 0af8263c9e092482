//! The identity suite behind `stable-spectral verify`.
//!
//! Every check computes one residual against a pinned tolerance. A check
//! whose formulas do not cover the parameters (the library answers with a
//! domain error) is reported as skipped; any other error is a failure.

use std::f64::consts::PI;

use stable_spectral::eigenfunctions::{
    one_sided_f_hat, one_sided_f_hat_from_rotation, verify_lucky_integral, DoneyForms,
};
use stable_spectral::special_functions::tau_binomial_check;
use stable_spectral::stable_model::{detect_doney, psi, OneSidedSide, DONEY_TOL};
use stable_spectral::wiener_hopf::{phi, sup_density, RotatedSupDensity, WhFactor};
use stable_spectral::*;

use crate::output::{Cell, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Skip,
}

impl Status {
    fn label(self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skip => "SKIP",
        }
    }
}

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: &'static str,
    pub status: Status,
    pub residual: Option<f64>,
    pub tol: f64,
    pub note: String,
}

/// Outcome of a check body: a residual, or the reason it does not apply.
enum Verdict {
    Residual(f64),
    NotApplicable(String),
}

use Verdict::{NotApplicable, Residual};

/// erf(1/2).
const ERF_HALF: f64 = 0.520_499_877_813_046_5;

type Body = fn(&StableParams, &SpectralConfig) -> Result<Verdict>;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / a.norm().max(b.norm())
}

fn s2_special_values(p: &StableParams, _: &SpectralConfig) -> Result<Verdict> {
    Ok(Residual(S2Evaluator::new(p.alpha())?.special_value_residual()?))
}

fn s2_functional_equations(p: &StableParams, _: &SpectralConfig) -> Result<Verdict> {
    let a = p.alpha();
    let ev = S2Evaluator::new(a)?;
    let dual = S2Evaluator::new(1.0 / a)?;
    let sin_pi = |w: Complex64| (w * PI).sin();
    let mut worst: f64 = 0.0;
    for z in [c(0.3, 0.4), c(0.9, -0.7), c(1.2, 1.1), c(-0.4, 0.6), c(0.65, 0.0)] {
        let vals = (|| -> Result<[Complex64; 5]> {
            Ok([ev.s2(z)?, ev.s2(z + 1.0)?, ev.s2(z + a)?, ev.s2(1.0 + a - z)?, dual.s2(z / a)?])
        })();
        let [s, s1, sa, refl, modular] = match vals {
            Ok(v) => v,
            Err(Error::PoleProximity(_)) => continue,
            Err(e) => return Err(e),
        };
        worst = worst
            .max(rel(s1 * 2.0 * sin_pi(z / a), s))
            .max(rel(sa * 2.0 * sin_pi(z), s))
            .max(rel(s * refl, c(1.0, 0.0)))
            .max(rel(modular, s));
    }
    Ok(Residual(worst))
}

fn wiener_hopf(p: &StableParams, _: &SpectralConfig) -> Result<Verdict> {
    let up = WhFactor::new(*p, Extremum::Supremum)?;
    let down = WhFactor::new(*p, Extremum::Infimum)?;
    let mut worst: f64 = 0.0;
    for i in 0..21 {
        let z = -30.0 + 3.0 * i as f64 + 0.1;
        let v = up.eval_complex(c(0.0, -z))? * down.eval_complex(c(0.0, z))? * (1.0 + psi(p, z));
        worst = worst.max((v - 1.0).norm());
    }
    Ok(Residual(worst))
}

fn supremum_law(p: &StableParams, _: &SpectralConfig) -> Result<Verdict> {
    let sd = SupDensity::new(p)?;
    let mut worst = (sd.mass() - 1.0).abs();
    for z in [0.5, 1.0, 2.0] {
        let want = phi(p, Extremum::Supremum, c(z, 0.0))?;
        worst = worst.max((sd.laplace(c(z, 0.0)) - want).norm());
    }
    Ok(Residual(worst))
}

fn laplace_of_f(p: &StableParams, cfg: &SpectralConfig) -> Result<Verdict> {
    let mut worst: f64 = 0.0;
    for dir in [Direction::Primal, Direction::Dual] {
        let f = EigenFn::new(p, dir)?;
        for z in [c(1.0, 0.0), c(3.0, 0.5)] {
            worst = worst.max((f.laplace(z)? - f.laplace_numeric(z, cfg.tol)?).norm());
        }
    }
    Ok(Residual(worst))
}

fn mellin_of_f(p: &StableParams, cfg: &SpectralConfig) -> Result<Verdict> {
    if p.rho() < 0.5 {
        return Ok(NotApplicable("the Mellin strip of F is empty for ρ < 1/2".into()));
    }
    let f = EigenFn::new(p, Direction::Primal)?;
    let z = c(-0.5 * p.alpha() * p.rho_hat(), 0.7);
    Ok(Residual((f.mellin(z)? - f.mellin_numeric(z, cfg.tol.max(1e-9))?).norm()))
}

fn rotated_identity(p: &StableParams, _: &SpectralConfig) -> Result<Verdict> {
    let (a, r) = (p.alpha(), p.rho());
    if p.is_one_sided() {
        return Ok(NotApplicable("two-sided parameters only".into()));
    }
    let rot = RotatedSupDensity::new(p)?;
    let fh = EigenFn::new(p, Direction::Dual)?;
    let k = 2.0 / a.sqrt() * S2Evaluator::new(a)?.s2_real(1.0 + a * r)?;
    let e = Complex64::from_polar(1.0, PI * r);
    let mut worst: f64 = 0.0;
    for x in [1.0, 1.5] {
        worst = worst.max(rel(rot.eval(x), k * (fh.f(x) + e * fh.f_prime(x))));
    }
    Ok(Residual(worst))
}

fn lucky_integral(p: &StableParams, _: &SpectralConfig) -> Result<Verdict> {
    if p.is_one_sided() {
        return Ok(NotApplicable("two-sided parameters only".into()));
    }
    Ok(Residual(verify_lucky_integral(p, 1.0, 1.5)?.residual))
}

fn b_beta(p: &StableParams, _: &SpectralConfig) -> Result<Verdict> {
    let b = 0.25 * (1.0 + p.alpha());
    Ok(Residual(tau_binomial_check(b, b / 3.0, p.alpha())?))
}

fn doney(p: &StableParams, _: &SpectralConfig) -> Result<Verdict> {
    if detect_doney(p, DONEY_TOL, 50).is_none() {
        return Ok(NotApplicable("not in a Doney class".into()));
    }
    let d = DoneyForms::new(p)?;
    let f = EigenFn::new(p, Direction::Primal)?;
    let mut worst: f64 = 0.0;
    for x in [0.5, 1.0, 2.0] {
        worst = worst.max((d.g(x)? - f.g(x)).abs() / f.g(x).abs());
    }
    Ok(Residual(worst))
}

fn one_sided(p: &StableParams, _: &SpectralConfig) -> Result<Verdict> {
    let Some(mode) = p.one_sided_mode() else {
        return Ok(NotApplicable("two-sided parameters".into()));
    };
    let (up, a) = (mode.side == OneSidedSide::SpectrallyNegative, p.alpha());
    let mut worst: f64 = 0.0;
    for x in [0.3, 1.0, 2.5] {
        // the extremum on the side without jumps is Exp(1)
        let d = if up { sup_density(p, x)? } else { sup_density(&p.dual(), x)? };
        worst = worst.max((d - (-x).exp()).abs());
        if up {
            worst = worst.max((one_sided_f_hat(a, x) - one_sided_f_hat_from_rotation(a, x)?).abs());
        }
    }
    Ok(Residual(worst))
}

fn brownian(p: &StableParams, cfg: &SpectralConfig) -> Result<Verdict> {
    if p.alpha() != 2.0 {
        return Ok(NotApplicable("α ≠ 2".into()));
    }
    let f = EigenFn::new(p, Direction::Primal)?;
    let m = SpectralModel::new(p, *cfg)?;
    let mut worst = (m.survival(1.0, 1.0)? - ERF_HALF).abs();
    for x in [0.3, 1.0, 2.5] {
        worst = worst.max((f.f(x) - x.sin()).abs());
    }
    Ok(Residual(worst))
}

fn survival_vs_density(p: &StableParams, cfg: &SpectralConfig) -> Result<Verdict> {
    let m = SpectralModel::new(p, *cfg)?;
    let mass = m.density_mass(1.0, 1.0)?;
    Ok(Residual((mass - m.survival(1.0, 1.0)?).abs()))
}

fn eigen_relation(p: &StableParams, cfg: &SpectralConfig) -> Result<Verdict> {
    let m = SpectralModel::new(p, *cfg)?;
    Ok(Residual(m.eigen_check(1.0, 0.5, 1.0)?.residual))
}

fn inversion(p: &StableParams, cfg: &SpectralConfig) -> Result<Verdict> {
    let m = SpectralModel::new(p, *cfg)?;
    let u = TestFunction::power_exp();
    Ok(Residual((m.pi_pi_hat(&u, 1.0)? / u.eval(1.0) - 1.0).abs()))
}

/// Name, tolerance and body of every check, in report order.
const CHECKS: [(&str, f64, Body); 15] = [
    ("s2_special_values", 1e-9, s2_special_values),
    ("s2_functional_equations", 1e-9, s2_functional_equations),
    ("wiener_hopf_factorization", 1e-8, wiener_hopf),
    ("supremum_mass_and_laplace", 1e-6, supremum_law),
    ("laplace_of_f", 1e-6, laplace_of_f),
    ("mellin_of_f", 1e-5, mellin_of_f),
    ("rotated_density_identity", 1e-5, rotated_identity),
    ("lucky_integral", 1e-5, lucky_integral),
    ("b_beta_integral", 1e-6, b_beta),
    ("doney_products", 1e-8, doney),
    ("one_sided_closed_forms", 1e-6, one_sided),
    ("brownian_reduction", 1e-6, brownian),
    ("survival_vs_integrated_density", 1e-5, survival_vs_density),
    ("eigenfunction_relation", 1e-5, eigen_relation),
    ("inversion_pi_pi_hat", 1e-5, inversion),
];

pub fn run(p: &StableParams, cfg: &SpectralConfig) -> Vec<CheckResult> {
    CHECKS
        .iter()
        .map(|&(name, tol, body)| {
            let (status, residual, note) = match body(p, cfg) {
                Ok(Residual(r)) if r <= tol => (Status::Pass, Some(r), String::new()),
                Ok(Residual(r)) => (Status::Fail, Some(r), "residual above tolerance".to_string()),
                Ok(NotApplicable(why)) => (Status::Skip, None, why),
                Err(Error::Domain(why)) => (Status::Skip, None, why),
                Err(e) => (Status::Fail, None, e.to_string()),
            };
            CheckResult {
                name,
                status,
                residual,
                tol,
                note,
            }
        })
        .collect()
}

pub const COLUMNS: &[&str] = &["check", "status", "residual", "tolerance", "note"];

pub fn fill(t: &mut Table, results: &[CheckResult]) {
    for r in results {
        t.push(vec![
            r.name.into(),
            r.status.label().into(),
            Cell::from(r.residual),
            r.tol.into(),
            r.note.clone().into(),
        ]);
    }
}
