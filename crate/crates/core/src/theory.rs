//! Constraint schedules, the binomial tail bound, the short-interval
//! covering of the true support, and an empirical check of the bound on the
//! number of observations captured by small components.

use std::f64::consts::PI;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::likelihood::count_in;
use crate::model::{support_bounds, to_piecewise, Interval, IntervalSet, MixtureParams};
use crate::sampling::{draw_sample_stream, stream_rng};

/// `c_n = c0 · exp(-n^d)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ScheduleRepr")]
pub struct Schedule {
    c0: f64,
    d: f64,
}

#[derive(Deserialize)]
struct ScheduleRepr {
    c0: f64,
    d: f64,
}

impl TryFrom<ScheduleRepr> for Schedule {
    type Error = crate::Error;
    fn try_from(r: ScheduleRepr) -> Result<Self> {
        Schedule::new(r.c0, r.d)
    }
}

impl Schedule {
    pub fn new(c0: f64, d: f64) -> Result<Self> {
        if !(c0 > 0.0 && c0.is_finite()) {
            return invalid(format!("schedule needs c0 > 0, got {c0}"));
        }
        if !(d > 0.0 && d < 1.0) {
            return invalid(format!("schedule exponent must lie in (0, 1), got {d}"));
        }
        Ok(Self { c0, d })
    }

    pub fn c0(&self) -> f64 {
        self.c0
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    /// `log c_n`.
    pub fn ln_c_n(&self, n: u64) -> f64 {
        c_n(self, n)
    }

    /// Linear `c_n`, saturating to zero; the flag is set when it underflowed.
    pub fn c_n_linear(&self, n: u64) -> (f64, bool) {
        let c = self.ln_c_n(n).exp();
        (c, c < f64::MIN_POSITIVE)
    }
}

/// `log c_n = log c0 - n^d`.
pub fn c_n(schedule: &Schedule, n: u64) -> f64 {
    schedule.c0.ln() - (n as f64).powf(schedule.d)
}

/// `log c_n' = log c0 - n^{1/4}`.
pub fn c_n_prime(c0: f64, n: u64) -> f64 {
    c0.ln() - (n as f64).powf(0.25)
}

/// Okamoto's bound `exp(-2 n δ²)` on `P(Z/n - p >= δ)`.
pub fn okamoto_bound(n: u64, delta: f64) -> f64 {
    (-2.0 * n as f64 * delta * delta).exp()
}

/// Exact `P(Z/n - p >= δ)` for `Z ~ Bin(n, p)`.
///
/// Terms are evaluated with the saddle-point form of the binomial pmf
/// (Loader's `stirlerr`/`bd0` decomposition) and summed from the upper end
/// with Neumaier compensation. The threshold `k >= n(p + δ)` is tested with
/// a `1e-9` slack so that a boundary value such as `60/100 - 0.5 = 0.1`
/// counts as reaching `δ`.
pub fn binomial_tail_exact(n: u64, p: f64, delta: f64) -> Result<f64> {
    Ok(match tail_start(n, p, delta)? {
        Some(k0) => neumaier_sum((k0..=n).rev().map(|k| binomial_pmf(k, n, p))),
        None => 0.0,
    })
}

/// `-2 n δ²`, the logarithm of [`okamoto_bound`]; stays finite where the
/// bound itself underflows.
pub fn ln_okamoto_bound(n: u64, delta: f64) -> f64 {
    -2.0 * n as f64 * delta * delta
}

/// Logarithm of [`binomial_tail_exact`], summed relative to the largest
/// term so that tails far below the double range stay comparable.
pub fn ln_binomial_tail_exact(n: u64, p: f64, delta: f64) -> Result<f64> {
    let k0 = match tail_start(n, p, delta)? {
        Some(k0) => k0,
        None => return Ok(f64::NEG_INFINITY),
    };
    let logs: Vec<f64> = (k0..=n).rev().map(|k| ln_binomial_pmf(k, n, p)).collect();
    let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY {
        return Ok(top);
    }
    Ok(top + neumaier_sum(logs.iter().map(|l| (l - top).exp())).ln())
}

fn neumaier_sum(terms: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for term in terms {
        let t = sum + term;
        if sum.abs() >= term.abs() {
            comp += (sum - t) + term;
        } else {
            comp += (term - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// First `k` with `k/n - p >= δ`, or `None` when no outcome reaches it.
fn tail_start(n: u64, p: f64, delta: f64) -> Result<Option<u64>> {
    if !(0.0..=1.0).contains(&p) {
        return invalid(format!("p must lie in [0, 1], got {p}"));
    }
    if !(delta > 0.0) {
        return invalid(format!("delta must be positive, got {delta}"));
    }
    if n == 0 || n > 100_000 {
        return invalid(format!("n must lie in [1, 1e5], got {n}"));
    }
    let threshold = (n as f64 * (p + delta) - 1e-9).ceil().max(0.0);
    Ok((threshold <= n as f64).then_some(threshold as u64))
}

/// `C(n,k) p^k (1-p)^{n-k}`, accurate to a few ulps in relative terms.
pub fn binomial_pmf(k: u64, n: u64, p: f64) -> f64 {
    ln_binomial_pmf(k, n, p).exp()
}

/// Logarithm of [`binomial_pmf`]; `-inf` for impossible outcomes.
pub fn ln_binomial_pmf(k: u64, n: u64, p: f64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    let q = 1.0 - p;
    if p == 0.0 {
        return if k == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    if q == 0.0 {
        return if k == n { 0.0 } else { f64::NEG_INFINITY };
    }
    let (nf, kf) = (n as f64, k as f64);
    if k == 0 {
        return if p < 0.1 { -bd0(nf, nf * q) - nf * p } else { nf * q.ln() };
    }
    if k == n {
        return if q < 0.1 { -bd0(nf, nf * p) - nf * q } else { nf * p.ln() };
    }
    let rest = nf - kf;
    let lc = stirlerr(n) - stirlerr(k) - stirlerr(n - k) - bd0(kf, nf * p) - bd0(rest, nf * q);
    let lf = (2.0 * PI).ln() + kf.ln() + (-kf / nf).ln_1p();
    lc - 0.5 * lf
}

/// `log(n!) - [(n + 1/2) log n - n + log sqrt(2π)]`.
fn stirlerr(n: u64) -> f64 {
    const S0: f64 = 1.0 / 12.0;
    const S1: f64 = 1.0 / 360.0;
    const S2: f64 = 1.0 / 1260.0;
    const S3: f64 = 1.0 / 1680.0;
    const S4: f64 = 1.0 / 1188.0;
    if n == 0 {
        return 0.0;
    }
    let nf = n as f64;
    if n <= 15 {
        let ln_fact: f64 = (2..=n).map(|k| k as f64).product::<f64>().ln();
        return ln_fact - (nf + 0.5) * nf.ln() + nf - 0.5 * (2.0 * PI).ln();
    }
    let nn = nf * nf;
    if n > 500 {
        (S0 - S1 / nn) / nf
    } else if n > 80 {
        (S0 - (S1 - S2 / nn) / nn) / nf
    } else if n > 35 {
        (S0 - (S1 - (S2 - S3 / nn) / nn) / nn) / nf
    } else {
        (S0 - (S1 - (S2 - (S3 - S4 / nn) / nn) / nn) / nn) / nf
    }
}

/// Deviance term `x log(x / np) + np - x`, by series when `x ≈ np`.
fn bd0(x: f64, np: f64) -> f64 {
    if (x - np).abs() < 0.1 * (x + np) {
        let mut v = (x - np) / (x + np);
        let mut s = (x - np) * v;
        let mut ej = 2.0 * x * v;
        v *= v;
        for j in 1..1000 {
            ej *= v;
            let s1 = s + ej / (2 * j + 1) as f64;
            if s1 == s {
                return s1;
            }
            s = s1;
        }
        return s;
    }
    x * (x / np).ln() + np - x
}

/// Division of a support set into half-open pieces of common length `2c`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Covering {
    pub pieces: Vec<Interval>,
    pub source: IntervalSet,
    pub c: f64,
}

impl Covering {
    /// `k(c)`.
    pub fn count(&self) -> usize {
        self.pieces.len()
    }

    /// `L / (2c) + M` with `L` the span of the source and `M` its number of intervals.
    pub fn count_bound(&self) -> f64 {
        let ivs = self.source.intervals();
        match (ivs.first(), ivs.last()) {
            (Some(first), Some(last)) => (last.hi - first.lo) / (2.0 * self.c) + ivs.len() as f64,
            _ => 0.0,
        }
    }

    pub fn pieces_hit(&self, window: &Interval) -> usize {
        self.pieces.iter().filter(|p| p.intersects(window)).count()
    }

    pub fn covers(&self, x: f64) -> bool {
        self.pieces.iter().any(|p| p.contains(x))
    }
}

/// Lays pieces of length `2c` left to right across each source interval;
/// the last piece is right-aligned to the interval's end, so at most one
/// overlap occurs per source interval. An interval no longer than `2c`
/// gets a single piece starting at its left end.
pub fn cover_support(j0: &IntervalSet, c: f64) -> Result<Covering> {
    if !(c > 0.0) {
        return invalid(format!("covering half-length must be positive, got {c}"));
    }
    let width = 2.0 * c;
    let mut pieces = Vec::new();
    for iv in j0.intervals() {
        let k = ((iv.len() / width) - 1e-12).ceil().max(1.0) as usize;
        if k == 1 {
            pieces.push(Interval::new(iv.lo, iv.lo + width));
            continue;
        }
        for i in 0..k - 1 {
            let lo = iv.lo + width * i as f64;
            pieces.push(Interval::new(lo, lo + width));
        }
        pieces.push(Interval::new(iv.hi - width, iv.hi));
    }
    Ok(Covering { pieces, source: j0.clone(), c })
}

/// Measured supremum of `R_n(J(θ)) / n` over small-component configurations
/// against the bound `3 M u 2 c0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundedRjReport {
    pub bound: f64,
    pub empirical_sup: f64,
    pub random_sup: f64,
    pub adversarial_sup: f64,
    pub slack: f64,
    pub u: f64,
    pub m: usize,
    pub n: usize,
    pub c0: f64,
    pub trials: usize,
    pub seed: u64,
}

/// Draws one sample of size `n` from `truth` (stream 0 of `seed`) and
/// searches for configurations of up to `M` supports of half-width at most
/// `c0` that capture as many observations as possible: `trials` random
/// configurations, each on its own stream, plus a greedy scan that places
/// each support on the densest remaining window of length `2 c0`.
pub fn verify_bounded_rj(truth: &MixtureParams, c0: f64, n: usize, trials: usize, seed: u64) -> Result<BoundedRjReport> {
    if !(c0 > 0.0) {
        return invalid(format!("c0 must be positive, got {c0}"));
    }
    let sample = draw_sample_stream(truth, n, seed, 0)?;
    let m = truth.num_components();
    let u = to_piecewise(truth).max_height();
    let bounds = support_bounds(truth);
    let nf = n as f64;

    let random_sup = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = stream_rng(seed, t as u64 + 1);
            let k = rng.gen_range(1..=m);
            let pieces = (0..k)
                .map(|_| {
                    let a = bounds.l_min + rng.gen::<f64>() * bounds.length;
                    let b = c0 * (1.0 - rng.gen::<f64>());
                    Interval::new(a - b, a + b)
                })
                .collect();
            count_in(&IntervalSet::from_intervals(pieces), &sample) as f64 / nf
        })
        .reduce(|| 0.0, f64::max);

    let mut remaining: Vec<f64> = sample.values().to_vec();
    let mut captured = 0usize;
    for _ in 0..m {
        let Some((start, len)) = densest_window(&remaining, 2.0 * c0) else { break };
        captured += len;
        remaining.drain(start..start + len);
    }
    let adversarial_sup = captured as f64 / nf;

    let empirical_sup = random_sup.max(adversarial_sup);
    let bound = 3.0 * m as f64 * u * 2.0 * c0;
    Ok(BoundedRjReport {
        bound,
        empirical_sup,
        random_sup,
        adversarial_sup,
        slack: bound - empirical_sup,
        u,
        m,
        n,
        c0,
        trials,
        seed,
    })
}

/// Start index and size of the largest run of sorted points fitting in a
/// half-open window of the given width anchored at a point.
fn densest_window(xs: &[f64], width: f64) -> Option<(usize, usize)> {
    if xs.is_empty() {
        return None;
    }
    let mut best = (0, 0);
    let mut j = 0;
    for i in 0..xs.len() {
        j = j.max(i);
        while j < xs.len() && xs[j] < xs[i] + width {
            j += 1;
        }
        if j - i > best.1 {
            best = (i, j - i);
        }
    }
    Some(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedule_examples() {
        let s = Schedule::new(1.0, 0.93).unwrap();
        assert!((s.ln_c_n(10) - (-8.5114)).abs() < 1e-3);
        assert_eq!(s.ln_c_n(1), -1.0);
        assert!((s.ln_c_n(1000) - (-616.6)).abs() < 0.5);
        assert!(s.c_n_linear(1000).0 > 0.0);
        assert!(s.c_n_linear(5000).1);
        assert!(Schedule::new(0.0, 0.5).is_err());
        assert!(Schedule::new(1.0, 1.0).is_err());
        assert!(Schedule::new(1.0, 0.0).is_err());
    }

    #[test]
    fn c_n_prime_examples() {
        assert!((c_n_prime(1.0, 16) - (-2.0)).abs() < 1e-15);
        assert!((c_n_prime(0.1, 1) - (0.1f64.ln() - 1.0)).abs() < 1e-15);
        assert!((c_n_prime(1.0, 10_000) - (-10.0)).abs() < 1e-12);
    }

    #[test]
    fn okamoto_examples() {
        assert!((okamoto_bound(100, 0.1) - (-2.0f64).exp()).abs() < 1e-15);
        assert!((okamoto_bound(100, 0.1) - 0.13534).abs() < 1e-5);
        assert!((okamoto_bound(1, 0.5) - 0.60653).abs() < 1e-5);
        assert!(okamoto_bound(10, 2.0) < okamoto_bound(10, 1.0));
    }

    #[test]
    fn tail_examples() {
        let t = binomial_tail_exact(100, 0.5, 0.1).unwrap();
        assert!((t - 0.028444).abs() < 1e-6, "{t}");
        assert!(t < okamoto_bound(100, 0.1));
        // δ = 1 - p: only Z = n remains
        let t = binomial_tail_exact(10, 0.3, 0.7).unwrap();
        assert!((t - 0.3f64.powi(10)).abs() < 1e-18);
        assert_eq!(binomial_tail_exact(10, 0.3, 0.8).unwrap(), 0.0);
        assert_eq!(binomial_tail_exact(50, 0.0, 0.1).unwrap(), 0.0);
        assert!(binomial_tail_exact(50, 1.5, 0.1).is_err());
        assert!(binomial_tail_exact(50, 0.5, 0.0).is_err());
    }

    #[test]
    fn pmf_sums_to_one() {
        for &(n, p) in &[(7u64, 0.3), (250, 0.01), (10_000, 0.7)] {
            let total: f64 = (0..=n).map(|k| binomial_pmf(k, n, p)).sum();
            assert!((total - 1.0).abs() < 1e-12, "n={n} p={p}: {total}");
        }
    }

    #[test]
    fn covering_examples() {
        let j0 = IntervalSet::from_intervals(vec![Interval::new(0.0, 1.0)]);
        let cov = cover_support(&j0, 0.3).unwrap();
        assert_eq!(cov.count(), 2);
        assert!((cov.pieces[0].hi - 0.6).abs() < 1e-15);
        assert!((cov.pieces[1].lo - 0.4).abs() < 1e-15 && cov.pieces[1].hi == 1.0);
        assert!((cov.count() as f64) <= cov.count_bound());

        let cov = cover_support(&j0, 0.5).unwrap();
        assert_eq!(cov.pieces, vec![Interval::new(0.0, 1.0)]);

        let j0 = IntervalSet::from_intervals(vec![Interval::new(0.0, 0.4), Interval::new(0.8, 1.0)]);
        let cov = cover_support(&j0, 0.1).unwrap();
        assert_eq!(cov.count(), 3);
        assert!((cov.count_bound() - 7.0).abs() < 1e-12);

        assert!(cover_support(&j0, 0.0).is_err());
    }

    #[test]
    fn bounded_rj_examples() {
        let truth = MixtureParams::from_triples(&[(0.6, 0.5, 0.5), (0.4, 0.6, 0.2)]).unwrap();
        let report = verify_bounded_rj(&truth, 0.01, 10_000, 200, 5).unwrap();
        assert!((report.bound - 0.192).abs() < 1e-12);
        assert!((report.u - 1.6).abs() < 1e-12);
        assert!(report.empirical_sup < report.bound);
        assert!((report.adversarial_sup - 0.064).abs() < 0.02, "{}", report.adversarial_sup);

        let single = MixtureParams::from_triples(&[(1.0, 0.5, 0.5)]).unwrap();
        let report = verify_bounded_rj(&single, 0.05, 10_000, 200, 6).unwrap();
        assert!((report.bound - 0.3).abs() < 1e-12);
        assert!((report.empirical_sup - 0.1).abs() < 0.02);

        let tiny = verify_bounded_rj(&single, 1e-9, 1_000, 50, 7).unwrap();
        assert!(tiny.empirical_sup <= 1.0 / 1000.0 + 1e-12);
    }
}
