//! Boundary spike against the true model as `n` grows.
//!
//! For each `n` the boundary model places a spike of half-width `c_n` on a
//! single observation over the fixed background; its log-likelihood is
//! deterministic. The true model's log-likelihood is averaged over seeded
//! replications.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{cell_stream, mean_sd, ExperimentConfig, ExperimentReport};
use crate::error::{invalid, Result};
use crate::ext_real;
use crate::likelihood::{log_add_exp, log_likelihood, spike_competitor_loglik_ln};
use crate::model::to_piecewise;
use crate::sampling::draw_sample_stream;
use crate::theory::Schedule;

pub const DEFAULT_N_GRID: [usize; 6] = [10, 50, 100, 500, 1000, 5000];
pub const DEFAULT_REPLICATIONS: usize = 50;
/// Range of `n` scanned for sign changes of the truth-minus-boundary gap.
/// Below ten the spike is too short to dominate the background and the gap
/// wobbles around zero; the crossover of interest lies beyond.
pub const CROSSOVER_SCAN_START: u64 = 10;
pub const CROSSOVER_SCAN_LIMIT: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table1Row {
    pub n: usize,
    pub replication: usize,
    #[serde(with = "ext_real")]
    pub loglik_true: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table1Entry {
    pub n: usize,
    pub log_c_n: f64,
    pub loglik_boundary: f64,
    pub loglik_true_mean: f64,
    pub loglik_true_sd: f64,
    pub loglik_true_mean_per_obs: f64,
    /// `n E0[log f0]`, the large-sample expectation of the true column.
    pub loglik_true_expected: f64,
    pub boundary_wins: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Crossover {
    /// Root of `n E0[log f0] = boundary(n)` in continuous `n`.
    pub n_star: f64,
    /// Sign changes of the gap over integer `n` in the scan range.
    pub sign_changes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table1Summary {
    pub expected_log_density: f64,
    pub entries: Vec<Table1Entry>,
    pub crossover: Option<Crossover>,
}

pub type Table1Report = ExperimentReport<Table1Row, Table1Summary>;

/// Boundary log-likelihood at continuous `n`:
/// `log{(1-α)h + α/(2 c_n)} + (n-1) log{(1-α)h}` with `log c_n = log c0 - n^d`.
pub fn boundary_loglik_continuous(background_height: f64, spike_weight: f64, schedule: &Schedule, n: f64) -> f64 {
    let ln_bg = (1.0 - spike_weight).ln() + background_height.ln();
    let ln_c = schedule.c0().ln() - n.powf(schedule.d());
    let ln_spike = spike_weight.ln() - std::f64::consts::LN_2 - ln_c;
    log_add_exp(ln_bg, ln_spike) + (n - 1.0) * ln_bg
}

/// Smallest `n` at which the expected true log-likelihood `n e0` overtakes
/// the boundary model, found by an integer scan followed by bisection.
pub fn crossover_sample_size(
    expected_log_density: f64,
    background_height: f64,
    spike_weight: f64,
    schedule: &Schedule,
) -> Option<Crossover> {
    let gap = |n: f64| n * expected_log_density - boundary_loglik_continuous(background_height, spike_weight, schedule, n);
    let mut sign_changes = 0;
    let mut first = None;
    let mut previous = gap(CROSSOVER_SCAN_START as f64);
    for k in CROSSOVER_SCAN_START + 1..=CROSSOVER_SCAN_LIMIT {
        let value = gap(k as f64);
        if (value > 0.0) != (previous > 0.0) {
            sign_changes += 1;
            first.get_or_insert(k);
        }
        previous = value;
    }
    let k = first?;
    let (mut lo, mut hi) = ((k - 1) as f64, k as f64);
    let lo_sign = gap(lo) > 0.0;
    for _ in 0..100 {
        let mid = lo + (hi - lo) / 2.0;
        if (gap(mid) > 0.0) == lo_sign {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(Crossover { n_star: lo + (hi - lo) / 2.0, sign_changes })
}

pub fn run_table1(config: &ExperimentConfig) -> Result<Table1Report> {
    let grid = config.n_grid_or(&DEFAULT_N_GRID)?;
    let reps = config.replications_or(DEFAULT_REPLICATIONS)?;
    let (background, (_, spike_weight)) = config.two_component_split()?;
    if !(spike_weight > 0.0 && spike_weight < 1.0) {
        return invalid("the spike weight (second truth weight) must lie in (0, 1)");
    }
    let bg_height = background.height();
    let e0 = to_piecewise(&config.truth).expected_log_density();

    let cells: Vec<(usize, usize, usize)> =
        grid.iter().enumerate().flat_map(|(ci, &n)| (0..reps).map(move |r| (ci, n, r))).collect();
    let rows = cells
        .par_iter()
        .map(|&(ci, n, rep)| {
            let sample = draw_sample_stream(&config.truth, n, config.seed, cell_stream(ci, rep))?;
            Ok(Table1Row { n, replication: rep, loglik_true: log_likelihood(&config.truth, &sample).value })
        })
        .collect::<Result<Vec<_>>>()?;

    let entries = grid
        .iter()
        .map(|&n| {
            let ln_c = config.schedule.ln_c_n(n as u64);
            let boundary = spike_competitor_loglik_ln(bg_height, spike_weight, ln_c, n)?;
            let values: Vec<f64> = rows.iter().filter(|r| r.n == n).map(|r| r.loglik_true).collect();
            let (mean, sd) = mean_sd(&values);
            Ok(Table1Entry {
                n,
                log_c_n: ln_c,
                loglik_boundary: boundary,
                loglik_true_mean: mean,
                loglik_true_sd: sd,
                loglik_true_mean_per_obs: mean / n as f64,
                loglik_true_expected: n as f64 * e0,
                boundary_wins: boundary > mean,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let crossover = crossover_sample_size(e0, bg_height, spike_weight, &config.schedule);
    Ok(ExperimentReport::new("table1", config, rows, Table1Summary { expected_log_density: e0, entries, crossover }))
}

impl Table1Summary {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,log_c_n,loglik_boundary,loglik_true_mean,loglik_true_sd,loglik_true_expected\n");
        for e in &self.entries {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                e.n, e.log_c_n, e.loglik_boundary, e.loglik_true_mean, e.loglik_true_sd, e.loglik_true_expected
            ));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn continuous_boundary_matches_discrete() {
        let s = Schedule::new(1.0, 0.93).unwrap();
        for n in [10usize, 100, 5000] {
            let discrete = spike_competitor_loglik_ln(1.0, 0.4, s.ln_c_n(n as u64), n).unwrap();
            let continuous = boundary_loglik_continuous(1.0, 0.4, &s, n as f64);
            assert!((discrete - continuous).abs() < 1e-9 * discrete.abs().max(1.0));
        }
    }

    #[test]
    fn small_table() {
        let cfg = ExperimentConfig { n_grid: Some(vec![10, 50]), replications: Some(4), ..Default::default() };
        let report = run_table1(&cfg).unwrap();
        assert_eq!(report.rows.len(), 8);
        let first = &report.summary.entries[0];
        assert!((first.loglik_boundary - 2.305).abs() < 0.01, "{}", first.loglik_boundary);
        assert!(first.boundary_wins);
        let cross = report.summary.crossover.clone().unwrap();
        assert_eq!(cross.sign_changes, 1);
        assert!(cross.n_star > 500.0 && cross.n_star < 1000.0, "{}", cross.n_star);
        assert_eq!(run_table1(&cfg).unwrap(), report);
    }

    #[test]
    fn needs_two_components() {
        let cfg = ExperimentConfig {
            truth: crate::model::MixtureParams::from_triples(&[(1.0, 0.5, 0.5)]).unwrap(),
            ..Default::default()
        };
        assert!(run_table1(&cfg).is_err());
    }
}
