use std::f64::consts::PI;

use super::{exp_sinh, gauss_kronrod, integrate_finite, QuadratureResult, Scalar};
use crate::error::Result;

const MAX_PIECES: usize = 4000;
const WYNN_WINDOW: usize = 40;

/// ∫₀^∞ f for f = (decaying envelope) × (bounded oscillation).
///
/// The half-line is cut every π/frequency, the pieces are integrated with
/// Gauss–Kronrod (tanh-sinh on the first piece, which may carry an endpoint
/// singularity) and the partial sums are accelerated with Wynn's epsilon
/// algorithm. `envelope_decay` is an exponential rate when known, 0 otherwise.
pub fn integrate_oscillatory_decaying<T: Scalar>(
    f: impl Fn(f64) -> T,
    envelope_decay: f64,
    frequency: f64,
    tol: f64,
) -> Result<QuadratureResult<T>> {
    if !(frequency > 0.0) {
        let scale = if envelope_decay > 0.0 { (1.0 / envelope_decay).clamp(1e-6, 1e6) } else { 1.0 };
        let first = exp_sinh(&f, 0.0, scale, tol);
        return Ok(first);
    }
    let step = PI / frequency;
    let piece_tol = 1e-3 * tol;

    let first = integrate_finite(&f, 0.0, step, piece_tol);
    let mut evaluations = first.evaluations;
    let mut piece_err = first.abs_error_estimate;
    let mut pieces_ok = first.converged;
    let mut partial = vec![first.value];
    let mut running = first.value;
    let mut small_terms = 0;
    let mut last_accel: Option<T> = None;
    let mut stable = 0;

    for k in 1..MAX_PIECES {
        let a = k as f64 * step;
        let r = gauss_kronrod(&f, a, a + step, piece_tol, 200);
        evaluations += r.evaluations;
        piece_err += r.abs_error_estimate;
        pieces_ok &= r.converged;
        running = running + r.value;
        partial.push(running);

        if r.value.magnitude() <= 1e-2 * tol {
            small_terms += 1;
            if small_terms >= 4 {
                return Ok(QuadratureResult {
                    value: running,
                    abs_error_estimate: piece_err + r.value.magnitude() * 4.0,
                    converged: pieces_ok,
                    evaluations,
                });
            }
        } else {
            small_terms = 0;
        }

        if partial.len() >= 6 {
            let window = &partial[partial.len().saturating_sub(WYNN_WINDOW)..];
            if let Some(acc) = wynn_epsilon(window) {
                if let Some(prev) = last_accel {
                    let diff = (acc - prev).magnitude();
                    if diff <= 0.1 * tol {
                        stable += 1;
                        if stable >= 3 {
                            return Ok(QuadratureResult {
                                value: acc,
                                abs_error_estimate: piece_err + diff.max(f64::EPSILON * acc.magnitude()),
                                converged: pieces_ok,
                                evaluations,
                            });
                        }
                    } else {
                        stable = 0;
                    }
                }
                last_accel = Some(acc);
            }
        }
    }
    let value = last_accel.unwrap_or(running);
    Ok(QuadratureResult {
        value,
        abs_error_estimate: f64::INFINITY,
        converged: false,
        evaluations,
    })
}

/// Highest-order even column of the epsilon table built on `s`.
pub(crate) fn wynn_epsilon<T: Scalar>(s: &[T]) -> Option<T> {
    let n = s.len();
    if n < 3 {
        return s.last().copied();
    }
    // prev holds column k-1, cur holds column k; columns shrink by one each step
    let mut prev: Vec<T> = vec![T::default(); n + 1];
    let mut cur: Vec<T> = s.to_vec();
    let mut best = *s.last()?;
    for k in 1..n {
        let mut next = Vec::with_capacity(n - k);
        for j in 0..n - k {
            let d = cur[j + 1] - cur[j];
            if d.magnitude() == 0.0 || !d.finite() {
                return Some(best);
            }
            next.push(prev[j + 1] + T::from_real(1.0) / d);
        }
        prev = cur;
        cur = next;
        if k % 2 == 0 {
            if let Some(&v) = cur.last() {
                if v.finite() {
                    best = v;
                } else {
                    return Some(best);
                }
            }
        }
    }
    Some(best)
}
