//! Monte Carlo paths with discretely monitored first exit from (0, ∞).
//!
//! Path i draws from a ChaCha8 stream keyed by (seed, i), so any estimate is
//! a pure function of its [`PathConfig`] regardless of thread count. Tallies
//! are integer counts and merge exactly.

use std::ops::Range;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stable_model::{sample_increment, StableParams};

/// Attached to every survival estimate: exits between grid points go unseen.
pub const MONITORING_BIAS: &str = "discrete-monitoring bias: overestimates survival";

/// Simulation settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathConfig {
    pub n_paths: u64,
    /// Euler grid step.
    pub dt: f64,
    /// Longest time any estimate may ask for.
    pub horizon: f64,
    pub seed: u64,
    /// Cap on n_paths·horizon/dt.
    pub step_budget: f64,
}

impl PathConfig {
    pub const DEFAULT_BUDGET: f64 = 2e10;

    pub fn new(n_paths: u64, dt: f64, horizon: f64, seed: u64) -> Result<Self> {
        let cfg = PathConfig {
            n_paths,
            dt,
            horizon,
            seed,
            step_budget: Self::DEFAULT_BUDGET,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_budget(self, step_budget: f64) -> Result<Self> {
        let cfg = PathConfig { step_budget, ..self };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        if self.n_paths == 0 || !(self.dt > 0.0) || !(self.horizon > 0.0) {
            return Err(Error::domain("need n_paths > 0, dt > 0 and horizon > 0"));
        }
        let steps = self.n_paths as f64 * self.horizon / self.dt;
        if steps > self.step_budget {
            return Err(Error::BudgetExceeded(format!(
                "{steps:.3e} increments requested, budget is {:.3e}",
                self.step_budget
            )));
        }
        Ok(())
    }

    fn rng(&self, path: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(path);
        rng
    }

    /// Number of steps and the step actually used to reach t.
    fn steps_to(&self, t: f64) -> (u64, f64) {
        let n = (t / self.dt).round().max(1.0) as u64;
        (n, t / n as f64)
    }
}

/// A Monte Carlo estimate with its binomial standard error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub value: f64,
    pub std_error: f64,
    pub n_effective: u64,
    pub bias_note: String,
}

impl McEstimate {
    fn binomial(hits: u64, n: u64, note: &str) -> Self {
        let p = hits as f64 / n as f64;
        McEstimate {
            value: p,
            std_error: (p * (1.0 - p) / n as f64).sqrt(),
            n_effective: n,
            bias_note: note.to_string(),
        }
    }
}

fn check_start(x: f64, t: f64, cfg: &PathConfig) -> Result<()> {
    if !(x > 0.0 && t > 0.0) {
        return Err(Error::domain("need x, t > 0"));
    }
    if t > cfg.horizon {
        return Err(Error::domain(format!("t = {t} exceeds the horizon {}", cfg.horizon)));
    }
    Ok(())
}

/// Position at time t, or `None` once a grid point lands below 0.
fn run_path(params: &StableParams, x: f64, n: u64, step: f64, rng: &mut ChaCha8Rng) -> Option<f64> {
    let mut pos = x;
    for _ in 0..n {
        pos += sample_increment(params, step, rng);
        if pos < 0.0 {
            return None;
        }
    }
    Some(pos)
}

/// Surviving and total path counts; shards merge by addition.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurvivalTally {
    pub survived: u64,
    pub total: u64,
}

impl SurvivalTally {
    pub fn merge(self, other: SurvivalTally) -> SurvivalTally {
        SurvivalTally {
            survived: self.survived + other.survived,
            total: self.total + other.total,
        }
    }

    pub fn estimate(&self) -> McEstimate {
        McEstimate::binomial(self.survived, self.total, MONITORING_BIAS)
    }
}

/// Survival counts over the path indices in `paths`.
pub fn survival_tally(params: &StableParams, x: f64, t: f64, cfg: &PathConfig, paths: Range<u64>) -> Result<SurvivalTally> {
    check_start(x, t, cfg)?;
    let (n, step) = cfg.steps_to(t);
    let total = paths.end.saturating_sub(paths.start);
    let survived = paths
        .into_par_iter()
        .filter(|&i| run_path(params, x, n, step, &mut cfg.rng(i)).is_some())
        .count() as u64;
    Ok(SurvivalTally { survived, total })
}

/// Fraction of paths from x whose grid values stay ≥ 0 up to time t.
pub fn estimate_survival(params: &StableParams, x: f64, t: f64, cfg: &PathConfig) -> Result<McEstimate> {
    Ok(survival_tally(params, x, t, cfg, 0..cfg.n_paths)?.estimate())
}

/// Histogram estimate of y ↦ p_t(x, y) among surviving paths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityHistogram {
    /// Bin edges, increasing.
    pub edges: Vec<f64>,
    /// Count per bin divided by n_paths and the bin width.
    pub bins: Vec<McEstimate>,
    /// Survivors that landed outside every bin, as a fraction of all paths.
    pub outside: f64,
    pub survival: McEstimate,
}

impl DensityHistogram {
    /// Σ p̂·Δy plus the mass outside the bins, equal to the survival estimate.
    pub fn total_mass(&self) -> f64 {
        self.bins
            .iter()
            .zip(self.edges.windows(2))
            .map(|(b, e)| b.value * (e[1] - e[0]))
            .sum::<f64>()
            + self.outside
    }
}

pub fn estimate_density(params: &StableParams, x: f64, t: f64, edges: &[f64], cfg: &PathConfig) -> Result<DensityHistogram> {
    check_start(x, t, cfg)?;
    if edges.len() < 2 || edges.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::domain("bin edges must be at least two increasing values"));
    }
    let (n, step) = cfg.steps_to(t);
    let k = edges.len() - 1;
    // counts per bin, then survivors outside the bins, then all survivors
    let counts = (0..cfg.n_paths)
        .into_par_iter()
        .fold(
            || vec![0u64; k + 2],
            |mut acc, i| {
                if let Some(y) = run_path(params, x, n, step, &mut cfg.rng(i)) {
                    acc[k + 1] += 1;
                    match edges.partition_point(|&e| e <= y) {
                        j if j >= 1 && j <= k => acc[j - 1] += 1,
                        _ => acc[k] += 1,
                    }
                }
                acc
            },
        )
        .reduce(
            || vec![0u64; k + 2],
            |a, b| a.iter().zip(&b).map(|(p, q)| p + q).collect(),
        );
    let total = cfg.n_paths;
    let bins = edges
        .windows(2)
        .zip(&counts)
        .map(|(e, &c)| {
            let w = e[1] - e[0];
            let b = McEstimate::binomial(c, total, MONITORING_BIAS);
            McEstimate {
                value: b.value / w,
                std_error: b.std_error / w,
                ..b
            }
        })
        .collect();
    Ok(DensityHistogram {
        edges: edges.to_vec(),
        bins,
        outside: counts[k] as f64 / total as f64,
        survival: McEstimate::binomial(counts[k + 1], total, MONITORING_BIAS),
    })
}

/// Fraction of positive X₁ draws started from 0.
pub fn estimate_positivity(params: &StableParams, n: u64, seed: u64) -> Result<McEstimate> {
    if n < 10_000 {
        return Err(Error::domain("positivity checks need at least 10⁴ draws"));
    }
    let cfg = PathConfig {
        n_paths: n,
        dt: 1.0,
        horizon: 1.0,
        seed,
        step_budget: f64::INFINITY,
    };
    let hits = (0..n)
        .into_par_iter()
        .filter(|&i| sample_increment(params, 1.0, &mut cfg.rng(i)) > 0.0)
        .count() as u64;
    Ok(McEstimate::binomial(hits, n, "exact sampling, no bias"))
}

/// Coarse, fine and extrapolated survival estimates from one set of paths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtrapolatedSurvival {
    pub coarse: McEstimate,
    pub fine: McEstimate,
    pub extrapolated: McEstimate,
    /// Assumed bias order p in bias ∝ dt^p.
    pub order: f64,
    pub refinement: u64,
}

/// Survival on grids dt and dt/r, combined as (r^p S_fine − S_coarse)/(r^p − 1)
/// with p = 1/α.
///
/// The coarse path is the fine path read every r steps (stable increments
/// add up exactly), so both indicators come from the same draws and the
/// extrapolation's error is estimated from per-path combined values.
pub fn estimate_survival_extrapolated(
    params: &StableParams,
    x: f64,
    t: f64,
    refinement: u64,
    cfg: &PathConfig,
) -> Result<ExtrapolatedSurvival> {
    check_start(x, t, cfg)?;
    if refinement < 2 {
        return Err(Error::domain("refinement factor must be at least 2"));
    }
    let fine_cfg = PathConfig {
        dt: cfg.dt / refinement as f64,
        ..*cfg
    };
    fine_cfg.validate()?;
    let (n_coarse, step_coarse) = cfg.steps_to(t);
    let step = step_coarse / refinement as f64;
    // paths surviving on both grids, and on the coarse grid only
    let (both, coarse_only) = (0..cfg.n_paths)
        .into_par_iter()
        .map(|i| {
            let mut rng = cfg.rng(i);
            let mut pos = x;
            let mut fine_alive = true;
            for _ in 0..n_coarse {
                for _ in 0..refinement {
                    pos += sample_increment(params, step, &mut rng);
                    fine_alive &= pos >= 0.0;
                }
                if pos < 0.0 {
                    return (0u64, 0u64);
                }
            }
            if fine_alive {
                (1, 0)
            } else {
                (0, 1)
            }
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    let n = cfg.n_paths;
    let order = 1.0 / params.alpha();
    let gain = (refinement as f64).powf(order);
    // per-path value (gain·I_fine − I_coarse)/(gain − 1)
    let v_both = 1.0;
    let v_coarse = -1.0 / (gain - 1.0);
    let nf = n as f64;
    let mean = (both as f64 * v_both + coarse_only as f64 * v_coarse) / nf;
    let second = (both as f64 * v_both * v_both + coarse_only as f64 * v_coarse * v_coarse) / nf;
    let var = (second - mean * mean).max(0.0) * nf / (nf - 1.0).max(1.0);
    Ok(ExtrapolatedSurvival {
        coarse: McEstimate::binomial(both + coarse_only, n, MONITORING_BIAS),
        fine: McEstimate::binomial(both, n, MONITORING_BIAS),
        extrapolated: McEstimate {
            value: mean,
            std_error: (var / nf).sqrt(),
            n_effective: n,
            bias_note: format!("Richardson in dt with assumed order {order:.4}; residual bias of higher order"),
        },
        order,
        refinement,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn erf(x: f64) -> f64 {
        statrs::function::erf::erf(x)
    }

    #[test]
    fn budget_is_enforced() {
        assert!(matches!(PathConfig::new(1_000_000, 1e-6, 1.0, 1), Err(Error::BudgetExceeded(_))));
        let cfg = PathConfig::new(100, 1e-2, 1.0, 1).unwrap();
        assert!(matches!(cfg.with_budget(10.0), Err(Error::BudgetExceeded(_))));
    }

    #[test]
    fn brownian_survival_within_bias_allowance() {
        let p = StableParams::new(2.0, 0.5).unwrap();
        let cfg = PathConfig::new(20_000, 1e-3, 2.0, 7).unwrap();
        let e = estimate_survival(&p, 1.0, 1.0, &cfg).unwrap();
        assert!((e.value - erf(0.5)).abs() < 3.0 * e.std_error + 0.02, "{e:?}");
        assert_eq!(e.bias_note, MONITORING_BIAS);
        let later = estimate_survival(&p, 1.0, 2.0, &cfg).unwrap();
        assert!(later.value <= e.value + 3.0 * e.std_error);
        let instant = estimate_survival(&p, 1.0, 1e-3, &cfg).unwrap();
        assert!(instant.value > 0.999);
    }

    #[test]
    fn reproducible_and_shardable() {
        let p = StableParams::new(1.5, 0.6).unwrap();
        let cfg = PathConfig::new(4000, 1e-2, 1.0, 42).unwrap();
        let a = estimate_survival(&p, 1.0, 1.0, &cfg).unwrap();
        let b = estimate_survival(&p, 1.0, 1.0, &cfg).unwrap();
        assert_eq!(a, b);
        let lo = survival_tally(&p, 1.0, 1.0, &cfg, 0..1500).unwrap();
        let hi = survival_tally(&p, 1.0, 1.0, &cfg, 1500..4000).unwrap();
        assert_eq!(lo.merge(hi).estimate(), a);
    }

    #[test]
    fn histogram_mass_equals_survival() {
        let p = StableParams::new(1.5, 0.5).unwrap();
        let cfg = PathConfig::new(5000, 1e-2, 1.0, 3).unwrap();
        let edges: Vec<f64> = (0..=20).map(|k| 0.25 * k as f64).collect();
        let h = estimate_density(&p, 1.0, 1.0, &edges, &cfg).unwrap();
        assert!((h.total_mass() - h.survival.value).abs() < 1e-12);
        let s = estimate_survival(&p, 1.0, 1.0, &cfg).unwrap();
        assert_eq!(s.value, h.survival.value);
    }

    #[test]
    fn positivity_matches_rho() {
        for &(a, r) in &[(1.3, 0.55), (0.7, 0.5), (1.0, 0.7)] {
            let p = StableParams::new(a, r).unwrap();
            let e = estimate_positivity(&p, 200_000, 11).unwrap();
            assert!((e.value - r).abs() < 4.0 * e.std_error, "({a},{r}): {e:?}");
        }
        assert!(estimate_positivity(&StableParams::new(1.3, 0.55).unwrap(), 10, 1).is_err());
    }

    #[test]
    fn finer_grids_see_more_exits() {
        let p = StableParams::new(1.5, 0.6).unwrap();
        let cfg = PathConfig::new(5000, 1e-2, 1.0, 5).unwrap();
        let e = estimate_survival_extrapolated(&p, 1.0, 1.0, 4, &cfg).unwrap();
        assert!(e.fine.value <= e.coarse.value);
        assert!(e.extrapolated.value <= e.fine.value);
    }
}
