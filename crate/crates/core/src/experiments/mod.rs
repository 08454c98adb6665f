//! Seeded Monte Carlo studies behind the command-line front end.
//!
//! Every study takes an [`ExperimentConfig`], derives one RNG stream per
//! `(n, replication)` cell from the master seed, runs the cells in
//! parallel, and merges results in `(n, replication)` order, so a report
//! is a pure function of its configuration.

pub mod consistency;
pub mod divergence;
pub mod surface;
pub mod table1;
pub mod verify;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::model::MixtureParams;
use crate::theory::Schedule;

pub const VERSION: &str = concat!("unimix ", env!("CARGO_PKG_VERSION"));

/// The simulation truth `0.6 U[0,1) + 0.4 U[0.4,0.8)`.
pub fn default_truth() -> MixtureParams {
    MixtureParams::from_triples(&[(0.6, 0.5, 0.5), (0.4, 0.6, 0.2)]).expect("valid default truth")
}

pub fn default_schedule() -> Schedule {
    Schedule::new(1.0, 0.93).expect("valid default schedule")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorMode {
    /// Background and weights fixed at the truth, one free component.
    Profile,
    /// All components free; exhaustive up to the size cap, multistart beyond.
    Exact,
    Multistart,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DivergenceSchedule {
    /// `log c_n = -n log n`.
    NLogN,
    /// The configured `c0 exp(-n^d)`.
    Power,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    Okamoto,
    Covering,
    BoundedRj,
}

/// Configuration file shared by all studies. Keys a study does not use
/// are ignored; missing keys take the study's defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_truth")]
    pub truth: MixtureParams,
    #[serde(default = "default_schedule")]
    pub schedule: Schedule,
    #[serde(default)]
    pub n_grid: Option<Vec<usize>>,
    #[serde(default)]
    pub replications: Option<usize>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Sample size of a single-sample study (surface, bounded_rj).
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default)]
    pub grid_size: Option<usize>,
    #[serde(default)]
    pub estimator: Option<EstimatorMode>,
    #[serde(default)]
    pub restarts: Option<usize>,
    #[serde(default)]
    pub divergence_schedule: Option<DivergenceSchedule>,
    #[serde(default)]
    pub checks: Option<Vec<Check>>,
    /// `c0` of the small-component checks.
    #[serde(default)]
    pub c0: Option<f64>,
    #[serde(default)]
    pub trials: Option<usize>,
}

fn default_seed() -> u64 {
    20_240_601
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            truth: default_truth(),
            schedule: default_schedule(),
            n_grid: None,
            replications: None,
            seed: default_seed(),
            n: None,
            grid_size: None,
            estimator: None,
            restarts: None,
            divergence_schedule: None,
            checks: None,
            c0: None,
            trials: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).or_else(|e| invalid(format!("bad config: {e}")))
    }

    pub(crate) fn n_grid_or(&self, default: &[usize]) -> Result<Vec<usize>> {
        let grid = self.n_grid.clone().unwrap_or_else(|| default.to_vec());
        if grid.is_empty() || grid.contains(&0) {
            return invalid("n_grid must be nonempty with every n >= 1");
        }
        Ok(grid)
    }

    pub(crate) fn replications_or(&self, default: usize) -> Result<usize> {
        match self.replications.unwrap_or(default) {
            0 => invalid("replications must be at least 1"),
            r => Ok(r),
        }
    }

    /// Background (first component) and the split `(w_background, w_free)`
    /// for the two-component studies.
    pub(crate) fn two_component_split(&self) -> Result<(crate::model::UniformComponent, (f64, f64))> {
        if self.truth.num_components() != 2 {
            return invalid("this study needs a two-component truth (background, free component)");
        }
        let w = self.truth.weights();
        Ok((self.truth.components()[0], (w[0], w[1])))
    }
}

/// Stream index of replication `rep` at grid position `cell`.
pub(crate) fn cell_stream(cell: usize, rep: usize) -> u64 {
    ((cell as u64) << 32) | rep as u64
}

/// A study's output: its resolved configuration, per-cell rows and a summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport<Row, Summary> {
    pub name: String,
    pub version: String,
    pub config: ExperimentConfig,
    pub config_hash: String,
    pub rows: Vec<Row>,
    pub summary: Summary,
}

impl<Row: Serialize, Summary: Serialize> ExperimentReport<Row, Summary> {
    pub(crate) fn new(name: &str, config: &ExperimentConfig, rows: Vec<Row>, summary: Summary) -> Self {
        Self {
            name: name.to_string(),
            version: VERSION.to_string(),
            config: config.clone(),
            config_hash: config_hash(config),
            rows,
            summary,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }
}

/// FNV-1a over the canonical JSON of the configuration.
pub fn config_hash(config: &ExperimentConfig) -> String {
    let text = serde_json::to_string(config).expect("config serializes");
    let hash = text.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x100_0000_01b3));
    format!("{hash:016x}")
}

pub(crate) fn median(values: &mut [f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.sort_by(f64::total_cmp);
    let mid = values.len() / 2;
    if values.len() % 2 == 1 {
        values[mid]
    } else {
        (values[mid - 1] + values[mid]) / 2.0
    }
}

pub(crate) fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = if values.len() > 1 {
        values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (mean, var.sqrt())
}
