//! Distance of the constrained MLE from the truth across sample sizes.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{cell_stream, median, EstimatorMode, ExperimentConfig, ExperimentReport};
use crate::error::Result;
use crate::estimator::{
    mle_exact, mle_multistart, mle_profile_single, param_distance, params_l1_distance, ExactOptions, FitResult,
    DEFAULT_EXACT_CAP,
};
use crate::likelihood::log_likelihood;
use crate::model::{support_bounds, ConstraintSpace, MixtureParams};
use crate::sampling::{draw_sample_stream, stream_rng};

pub const DEFAULT_N_GRID: [usize; 6] = [50, 100, 200, 500, 1000, 2000];
pub const DEFAULT_REPLICATIONS: usize = 20;
pub const DEFAULT_RESTARTS: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyRow {
    pub n: usize,
    pub replication: usize,
    pub log_c_n: f64,
    /// `None` when the replication failed; see `error`.
    pub loglik_true: Option<f64>,
    pub loglik_mle: Option<f64>,
    pub l1_distance: Option<f64>,
    pub param_distance: Option<f64>,
    pub estimate: Option<MixtureParams>,
    pub evaluations: u64,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyEntry {
    pub n: usize,
    pub completed: usize,
    pub failed: usize,
    pub median_l1_distance: f64,
    pub median_param_distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencySummary {
    pub estimator: EstimatorMode,
    pub entries: Vec<ConsistencyEntry>,
}

pub type ConsistencyReport = ExperimentReport<ConsistencyRow, ConsistencySummary>;

fn fit_one(config: &ExperimentConfig, mode: EstimatorMode, n: usize, stream: u64) -> Result<(f64, FitResult)> {
    let sample = draw_sample_stream(&config.truth, n, config.seed, stream)?;
    let space = ConstraintSpace::for_support(support_bounds(&config.truth), config.schedule.ln_c_n(n as u64))?;
    let m = config.truth.num_components();
    let restarts = config.restarts.unwrap_or(DEFAULT_RESTARTS);
    let fit = match mode {
        EstimatorMode::Profile => {
            let (background, weights) = config.two_component_split()?;
            mle_profile_single(&sample, background, weights, &space)?
        }
        EstimatorMode::Exact if n <= DEFAULT_EXACT_CAP && m <= 2 => mle_exact(&sample, m, &space, ExactOptions::default())?,
        EstimatorMode::Exact | EstimatorMode::Multistart => {
            let search_seed = stream_rng(config.seed, stream).gen::<u64>();
            mle_multistart(&sample, m, &space, restarts, search_seed)?
        }
    };
    Ok((log_likelihood(&config.truth, &sample).value, fit))
}

pub fn run_consistency(config: &ExperimentConfig) -> Result<ConsistencyReport> {
    let grid = config.n_grid_or(&DEFAULT_N_GRID)?;
    let reps = config.replications_or(DEFAULT_REPLICATIONS)?;
    let mode = config.estimator.unwrap_or(EstimatorMode::Profile);
    if mode == EstimatorMode::Profile {
        config.two_component_split()?;
    }
    let cells: Vec<(usize, usize, usize)> =
        grid.iter().enumerate().flat_map(|(ci, &n)| (0..reps).map(move |r| (ci, n, r))).collect();
    let rows: Vec<ConsistencyRow> = cells
        .par_iter()
        .map(|&(ci, n, rep)| {
            let log_c_n = config.schedule.ln_c_n(n as u64);
            let outcome = fit_one(config, mode, n, cell_stream(ci, rep)).and_then(|(loglik_true, fit)| {
                let dist = param_distance(&fit.params, &config.truth)?;
                Ok((loglik_true, fit, dist))
            });
            match outcome {
                Ok((loglik_true, fit, dist)) => ConsistencyRow {
                    n,
                    replication: rep,
                    log_c_n,
                    loglik_true: Some(loglik_true),
                    loglik_mle: Some(fit.loglik),
                    l1_distance: Some(params_l1_distance(&fit.params, &config.truth)),
                    param_distance: Some(dist),
                    estimate: Some(fit.params),
                    evaluations: fit.evaluations,
                    error: None,
                },
                Err(e) => ConsistencyRow {
                    n,
                    replication: rep,
                    log_c_n,
                    loglik_true: None,
                    loglik_mle: None,
                    l1_distance: None,
                    param_distance: None,
                    estimate: None,
                    evaluations: 0,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();

    let entries = grid
        .iter()
        .map(|&n| {
            let at_n: Vec<&ConsistencyRow> = rows.iter().filter(|r| r.n == n).collect();
            let mut l1: Vec<f64> = at_n.iter().filter_map(|r| r.l1_distance).collect();
            let mut pd: Vec<f64> = at_n.iter().filter_map(|r| r.param_distance).collect();
            ConsistencyEntry {
                n,
                completed: l1.len(),
                failed: at_n.len() - l1.len(),
                median_l1_distance: median(&mut l1),
                median_param_distance: median(&mut pd),
            }
        })
        .collect();
    Ok(ExperimentReport::new("consistency", config, rows, ConsistencySummary { estimator: mode, entries }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spike_at_small_n_truth_at_large_n() {
        let cfg = ExperimentConfig { n_grid: Some(vec![30, 1500]), replications: Some(3), ..Default::default() };
        let report = run_consistency(&cfg).unwrap();
        assert_eq!(report.rows.len(), 6);
        let e = &report.summary.entries;
        assert_eq!(e[0].failed + e[1].failed, 0);
        assert!(e[0].median_l1_distance > 0.5, "{:?}", e[0]);
        assert!(e[1].median_l1_distance < 0.15, "{:?}", e[1]);
        for row in &report.rows {
            assert!(row.loglik_mle.unwrap() >= row.loglik_true.unwrap() - 1e-9);
        }
    }

    #[test]
    fn free_estimator_small_grid() {
        let cfg = ExperimentConfig {
            n_grid: Some(vec![20]),
            replications: Some(2),
            estimator: Some(EstimatorMode::Exact),
            ..Default::default()
        };
        let report = run_consistency(&cfg).unwrap();
        assert!(report.rows.iter().all(|r| r.error.is_none()));
        assert_eq!(run_consistency(&cfg).unwrap(), report);
    }
}
