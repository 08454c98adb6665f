//! Mixing-weight optimization for fixed component supports.
//!
//! For fixed supports the log-likelihood is concave in the weights, so the
//! multiplicative fixed point `α_m ← (1/n) Σ_i α_m f_m(x_i) / f(x_i)` started
//! from the uniform vector climbs to the global optimum. Observations with
//! the same set of covering components contribute identically, so the
//! iteration runs over coverage patterns with multiplicities.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::likelihood::{log_add_exp, log_sum_exp};
use crate::model::UniformComponent;
use crate::sampling::SampleSet;

pub const DEFAULT_WEIGHT_TOL: f64 = 1e-10;
pub const MAX_WEIGHT_ITERATIONS: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightFit {
    pub weights: Vec<f64>,
    pub loglik: f64,
    pub iterations: usize,
    /// Log-likelihood after each iteration, starting with the uniform start.
    pub trace: Vec<f64>,
}

/// Distinct coverage patterns: bitmask of covering supports and how many
/// observations share it.
fn coverage_patterns(sample: &SampleSet, supports: &[UniformComponent]) -> Result<Vec<(u64, usize)>> {
    if supports.len() > 64 {
        return Err(Error::Unsupported(format!("{} supports exceed the 64-support limit", supports.len())));
    }
    let mut patterns: BTreeMap<u64, usize> = BTreeMap::new();
    for (index, x) in sample.values().iter().enumerate() {
        let mask = supports
            .iter()
            .enumerate()
            .filter(|(_, s)| s.contains(*x))
            .fold(0u64, |acc, (m, _)| acc | (1 << m));
        if mask == 0 {
            return Err(Error::UncoveredPoint { index, value: *x });
        }
        *patterns.entry(mask).or_default() += 1;
    }
    Ok(patterns.into_iter().collect())
}

fn mul_count(count: usize, value: f64) -> f64 {
    if count == 0 {
        0.0
    } else {
        count as f64 * value
    }
}

/// Maximizes `Σ_i log Σ_m α_m f_m(x_i)` over the simplex by the EM fixed
/// point, stopping once an iteration gains less than `tol`.
pub fn optimize_weights(sample: &SampleSet, supports: &[UniformComponent], tol: f64) -> Result<WeightFit> {
    if supports.is_empty() {
        return Err(Error::InvalidArgument("at least one support is required".into()));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    let patterns = coverage_patterns(sample, supports)?;
    let m = supports.len();
    let n = sample.len() as f64;
    let ln_heights: Vec<f64> = supports.iter().map(UniformComponent::ln_height).collect();
    let mut weights = vec![1.0 / m as f64; m];
    let mut terms = vec![f64::NEG_INFINITY; m];

    let mut evaluate = |weights: &[f64], next: Option<&mut Vec<f64>>| -> f64 {
        let mut acc = next.map(|v| {
            v.iter_mut().for_each(|w| *w = 0.0);
            v
        });
        let mut total = 0.0;
        for &(mask, count) in &patterns {
            for k in 0..m {
                terms[k] = if mask & (1 << k) != 0 && weights[k] > 0.0 {
                    weights[k].ln() + ln_heights[k]
                } else {
                    f64::NEG_INFINITY
                };
            }
            let ln_f = log_sum_exp(&terms);
            total += mul_count(count, ln_f);
            if let Some(acc) = acc.as_deref_mut() {
                for k in 0..m {
                    acc[k] += count as f64 * (terms[k] - ln_f).exp();
                }
            }
        }
        total
    };

    let mut current = evaluate(&weights, None);
    let mut trace = vec![current];
    let mut iterations = 0;
    let mut next = vec![0.0; m];
    while iterations < MAX_WEIGHT_ITERATIONS {
        evaluate(&weights, Some(&mut next));
        let updated: Vec<f64> = next.iter().map(|r| r / n).collect();
        let value = evaluate(&updated, None);
        iterations += 1;
        trace.push(value);
        let gain = value - current;
        if gain >= 0.0 || !value.is_finite() {
            weights = updated;
            current = value;
        }
        if !(gain >= tol) {
            break;
        }
    }
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    Ok(WeightFit { weights, loglik: current, iterations, trace })
}

/// Optimal weight `α` on the first of two supports given the observation
/// counts covered only by the first (`only_first`), only by the second
/// (`only_second`) and by both (`both`), and the two log heights.
///
/// The objective `n1 log(α h1) + n2 log((1-α) h2) + n12 log(α h1 + (1-α) h2)`
/// is concave; its derivative is bisected on `[0, 1]` until the bracket is
/// narrower than `tol`, and the endpoints are compared explicitly.
pub fn optimize_two_weights(
    only_first: usize,
    only_second: usize,
    both: usize,
    ln_h1: f64,
    ln_h2: f64,
    tol: f64,
) -> (f64, f64) {
    let objective = |alpha: f64| -> f64 {
        let a = alpha.ln() + ln_h1;
        let b = (1.0 - alpha).ln() + ln_h2;
        mul_count(only_first, a) + mul_count(only_second, b) + mul_count(both, log_add_exp(a, b))
    };
    let top = ln_h1.max(ln_h2);
    let (r, s) = ((ln_h1 - top).exp(), (ln_h2 - top).exp());
    let slope = |alpha: f64| -> f64 {
        only_first as f64 / alpha - only_second as f64 / (1.0 - alpha)
            + both as f64 * (r - s) / (alpha * r + (1.0 - alpha) * s)
    };
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut alpha = 0.5;
    for _ in 0..200 {
        alpha = lo + (hi - lo) / 2.0;
        let g = slope(alpha);
        if g == 0.0 {
            break;
        }
        if g > 0.0 {
            lo = alpha;
        } else {
            hi = alpha;
        }
        if hi - lo <= tol {
            alpha = lo + (hi - lo) / 2.0;
            break;
        }
    }
    let mut best = (alpha, objective(alpha));
    for edge in [0.0, 1.0] {
        let value = objective(edge);
        if value > best.1 {
            best = (edge, value);
        }
    }
    best
}

/// Best weights for fixed supports: closed-form for one support, bisection
/// for two, the EM fixed point otherwise.
pub fn best_weights(sample: &SampleSet, supports: &[UniformComponent], tol: f64) -> Result<(Vec<f64>, f64)> {
    match supports {
        [only] => {
            let patterns = coverage_patterns(sample, supports)?;
            debug_assert_eq!(patterns.len(), 1);
            Ok((vec![1.0], sample.len() as f64 * only.ln_height()))
        }
        [first, second] => {
            let mut counts = [0usize; 3];
            for (index, x) in sample.values().iter().enumerate() {
                match (first.contains(*x), second.contains(*x)) {
                    (true, false) => counts[0] += 1,
                    (false, true) => counts[1] += 1,
                    (true, true) => counts[2] += 1,
                    (false, false) => return Err(Error::UncoveredPoint { index, value: *x }),
                }
            }
            let (alpha, loglik) =
                optimize_two_weights(counts[0], counts[1], counts[2], first.ln_height(), second.ln_height(), tol);
            Ok((vec![alpha, 1.0 - alpha], loglik))
        }
        _ => optimize_weights(sample, supports, tol).map(|fit| (fit.weights, fit.loglik)),
    }
}
