//! A lower bound that shrinks too fast: spikes beat the truth at every `n`.
//!
//! With `log c_n = -n log n` a spike of half-width `c_n` on one observation
//! gains `n log n` against a linear loss, so the constrained MLE sits on
//! the boundary `b = c_n` and never approaches the truth.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{cell_stream, median, DivergenceSchedule, ExperimentConfig, ExperimentReport};
use crate::error::Result;
use crate::estimator::mle_profile_single;
use crate::likelihood::log_likelihood;
use crate::model::{support_bounds, ConstraintSpace, MixtureParams, UniformComponent};
use crate::sampling::draw_sample_stream;

pub const DEFAULT_N_GRID: [usize; 4] = [10, 100, 1000, 5000];
pub const DEFAULT_REPLICATIONS: usize = 20;

/// `log c_n` of the chosen divergence schedule.
pub fn divergence_ln_c(config: &ExperimentConfig, kind: DivergenceSchedule, n: usize) -> f64 {
    match kind {
        DivergenceSchedule::NLogN => -(n as f64) * (n as f64).ln(),
        DivergenceSchedule::Power => config.schedule.ln_c_n(n as u64),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivergenceRow {
    pub n: usize,
    pub replication: usize,
    pub log_c_n: f64,
    pub loglik_true: f64,
    pub loglik_spike: f64,
    pub spike_wins: bool,
    pub loglik_mle: f64,
    pub mle_log_half_width: f64,
    pub mle_at_boundary: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivergenceEntry {
    pub n: usize,
    pub log_c_n: f64,
    pub spike_win_fraction: f64,
    pub boundary_fraction: f64,
    pub median_gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivergenceSummary {
    pub schedule: DivergenceSchedule,
    pub entries: Vec<DivergenceEntry>,
}

pub type DivergenceReport = ExperimentReport<DivergenceRow, DivergenceSummary>;

pub fn run_divergence(config: &ExperimentConfig) -> Result<DivergenceReport> {
    let grid = config.n_grid_or(&DEFAULT_N_GRID)?;
    let reps = config.replications_or(DEFAULT_REPLICATIONS)?;
    let kind = config.divergence_schedule.unwrap_or(DivergenceSchedule::NLogN);
    let (background, weights) = config.two_component_split()?;
    let bounds = support_bounds(&config.truth);

    let cells: Vec<(usize, usize, usize)> =
        grid.iter().enumerate().flat_map(|(ci, &n)| (0..reps).map(move |r| (ci, n, r))).collect();
    let rows = cells
        .par_iter()
        .map(|&(ci, n, rep)| {
            let sample = draw_sample_stream(&config.truth, n, config.seed, cell_stream(ci, rep))?;
            let ln_c = divergence_ln_c(config, kind, n);
            let spike = UniformComponent::from_ln_half_width(sample.min(), ln_c)?;
            let spiked = MixtureParams::new(vec![weights.0, weights.1], vec![background, spike])?;
            let loglik_true = log_likelihood(&config.truth, &sample).value;
            let loglik_spike = log_likelihood(&spiked, &sample).value;
            let space = ConstraintSpace::for_support(bounds, ln_c)?;
            let fit = mle_profile_single(&sample, background, weights, &space)?;
            let mle_log_half_width = fit.params.components()[1].ln_half_width();
            Ok(DivergenceRow {
                n,
                replication: rep,
                log_c_n: ln_c,
                loglik_true,
                loglik_spike,
                spike_wins: loglik_spike > loglik_true,
                loglik_mle: fit.loglik,
                mle_log_half_width,
                mle_at_boundary: mle_log_half_width == ln_c,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let entries = grid
        .iter()
        .map(|&n| {
            let at_n: Vec<&DivergenceRow> = rows.iter().filter(|r| r.n == n).collect();
            let count = at_n.len() as f64;
            let mut gaps: Vec<f64> = at_n.iter().map(|r| r.loglik_spike - r.loglik_true).collect();
            DivergenceEntry {
                n,
                log_c_n: divergence_ln_c(config, kind, n),
                spike_win_fraction: at_n.iter().filter(|r| r.spike_wins).count() as f64 / count,
                boundary_fraction: at_n.iter().filter(|r| r.mle_at_boundary).count() as f64 / count,
                median_gap: median(&mut gaps),
            }
        })
        .collect();
    Ok(ExperimentReport::new("divergence", config, rows, DivergenceSummary { schedule: kind, entries }))
}
