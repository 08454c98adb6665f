//! Numerical checks of the probability and covering bounds.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Check, ExperimentConfig, ExperimentReport};
use crate::error::{invalid, Result};
use crate::model::{support_bounds, Interval, IntervalSet};
use crate::sampling::stream_rng;
use crate::ext_real;
use crate::theory::{cover_support, ln_binomial_tail_exact, ln_okamoto_bound, verify_bounded_rj};

pub const OKAMOTO_N: [u64; 4] = [10, 100, 1_000, 10_000];
pub const OKAMOTO_P: [f64; 5] = [0.1, 0.3, 0.5, 0.7, 0.9];
pub const OKAMOTO_DELTA: [f64; 4] = [0.01, 0.05, 0.1, 0.2];
pub const DEFAULT_COVERING_TRIALS: usize = 100;
/// Windows tested per random support set: 100 sets give 10^4 windows.
pub const WINDOWS_PER_COVERING: usize = 100;
pub const DEFAULT_RJ_N: usize = 10_000;
pub const DEFAULT_RJ_C0: f64 = 0.01;
pub const DEFAULT_RJ_TRIALS: usize = 1_000;
/// Streams of the covering check start here, clear of per-cell streams.
const COVERING_STREAM_BASE: u64 = 1 << 48;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyRow {
    pub check: Check,
    pub label: String,
    #[serde(with = "ext_real")]
    pub measured: f64,
    #[serde(with = "ext_real")]
    pub bound: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifySummary {
    pub checks: Vec<Check>,
    pub total: usize,
    pub failed: usize,
    pub pass: bool,
}

pub type VerifyReport = ExperimentReport<VerifyRow, VerifySummary>;

/// Exact upper tail against `exp(-2 n δ²)` over the fixed grid, skipping
/// points with `n δ < 1` or `p + δ > 1`. Both sides are reported as
/// logarithms: at `n = 10^4` they fall far below the double range.
pub fn okamoto_rows() -> Result<Vec<VerifyRow>> {
    let mut rows = Vec::new();
    for &n in &OKAMOTO_N {
        for &p in &OKAMOTO_P {
            for &delta in &OKAMOTO_DELTA {
                if (n as f64) * delta < 1.0 || p + delta > 1.0 {
                    continue;
                }
                let exact = ln_binomial_tail_exact(n, p, delta)?;
                let bound = ln_okamoto_bound(n, delta);
                rows.push(VerifyRow {
                    check: Check::Okamoto,
                    label: format!("log tail n={n} p={p} delta={delta}"),
                    measured: exact,
                    bound,
                    pass: exact < bound,
                });
            }
        }
    }
    Ok(rows)
}

/// Random support sets of up to `max_intervals` pieces inside `[lo, hi)`
/// with log-uniform `c`; two rows per set: piece count against
/// `L/(2c) + M`, and the most pieces hit by a length-`2c` window inside
/// one source interval against 3 (windows must also be fully covered).
pub fn covering_rows(lo: f64, hi: f64, max_intervals: usize, trials: usize, seed: u64) -> Vec<VerifyRow> {
    (0..trials)
        .into_par_iter()
        .flat_map_iter(|t| {
            let mut rng = stream_rng(seed, COVERING_STREAM_BASE + t as u64);
            let k = rng.gen_range(1..=max_intervals.max(1));
            let pieces: Vec<Interval> = (0..k)
                .map(|_| {
                    let a = lo + rng.gen::<f64>() * (hi - lo);
                    let b = lo + rng.gen::<f64>() * (hi - lo);
                    Interval::new(a.min(b), a.max(b))
                })
                .filter(|iv| iv.len() > 0.0)
                .collect();
            let j0 = IntervalSet::from_intervals(pieces);
            let c = (10f64.ln() * rng.gen_range(-4.0..-1.0)).exp();
            let cover = cover_support(&j0, c).expect("positive c");
            let count_ok = (cover.count() as f64) <= cover.count_bound();
            let mut max_hits = 0;
            let mut covered = true;
            for _ in 0..WINDOWS_PER_COVERING {
                if j0.is_empty() {
                    break;
                }
                let iv = j0.intervals()[rng.gen_range(0..j0.intervals().len())];
                let width = (2.0 * c).min(iv.len());
                let start = iv.lo + rng.gen::<f64>() * (iv.len() - width);
                let window = Interval::new(start, start + width);
                max_hits = max_hits.max(cover.pieces_hit(&window));
                for s in 0..=8 {
                    let x = start + width * s as f64 / 8.0;
                    if iv.contains(x) && !cover.covers(x) {
                        covered = false;
                    }
                }
            }
            let label = format!("trial={t} intervals={} c={c:.3e}", j0.intervals().len());
            [
                VerifyRow {
                    check: Check::Covering,
                    label: format!("{label} count"),
                    measured: cover.count() as f64,
                    bound: cover.count_bound(),
                    pass: count_ok,
                },
                VerifyRow {
                    check: Check::Covering,
                    label: format!("{label} hits"),
                    measured: max_hits as f64,
                    bound: 3.0,
                    pass: max_hits <= 3 && covered,
                },
            ]
        })
        .collect()
}

pub fn run_verify(config: &ExperimentConfig) -> Result<VerifyReport> {
    let checks = config.checks.clone().unwrap_or_else(|| vec![Check::Okamoto, Check::Covering, Check::BoundedRj]);
    if checks.is_empty() {
        return invalid("no checks selected");
    }
    let mut rows = Vec::new();
    for check in &checks {
        match check {
            Check::Okamoto => rows.extend(okamoto_rows()?),
            Check::Covering => {
                let bounds = support_bounds(&config.truth);
                let trials = config.trials.unwrap_or(DEFAULT_COVERING_TRIALS);
                let m = config.truth.num_components();
                rows.extend(covering_rows(bounds.l_min, bounds.l_max, m, trials, config.seed));
            }
            Check::BoundedRj => {
                let n = config.n.unwrap_or(DEFAULT_RJ_N);
                let c0 = config.c0.unwrap_or(DEFAULT_RJ_C0);
                let trials = config.trials.unwrap_or(DEFAULT_RJ_TRIALS);
                let report = verify_bounded_rj(&config.truth, c0, n, trials, config.seed)?;
                rows.push(VerifyRow {
                    check: Check::BoundedRj,
                    label: format!("n={n} c0={c0} trials={trials}"),
                    measured: report.empirical_sup,
                    bound: report.bound,
                    pass: report.empirical_sup < report.bound,
                });
            }
        }
    }
    let failed = rows.iter().filter(|r| !r.pass).count();
    let summary = VerifySummary { checks, total: rows.len(), failed, pass: failed == 0 };
    Ok(ExperimentReport::new("verify", config, rows, summary))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn okamoto_grid_holds() {
        let rows = okamoto_rows().unwrap();
        assert!(rows.len() > 50);
        assert!(rows.iter().all(|r| r.pass), "{:?}", rows.iter().find(|r| !r.pass));
    }

    #[test]
    fn covering_checks_hold() {
        let rows = covering_rows(0.0, 1.0, 3, 30, 11);
        assert_eq!(rows.len(), 60);
        assert!(rows.iter().all(|r| r.pass), "{:?}", rows.iter().find(|r| !r.pass));
    }

    #[test]
    fn selected_checks_only() {
        let cfg = ExperimentConfig { checks: Some(vec![Check::BoundedRj]), n: Some(2_000), trials: Some(50), ..Default::default() };
        let report = run_verify(&cfg).unwrap();
        assert_eq!(report.rows.len(), 1);
        assert!(report.summary.pass);
    }
}
