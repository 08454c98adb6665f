//! Log-likelihood surface of the free component over `(a, b)`.
//!
//! The center axis holds every observation, the midpoints between
//! neighbours and a linear fill, so that at the smallest half-width each
//! observation shows up as its own elevated plateau.

use serde::{Deserialize, Serialize};

use super::{cell_stream, ExperimentConfig, ExperimentReport};
use crate::error::{invalid, Result};
use crate::likelihood::{count_elevated_plateaus, surface_grid, GridSpec, SurfaceGrid};
use crate::model::support_bounds;
use crate::sampling::{draw_sample_stream, SampleSet};

pub const DEFAULT_N: usize = 40;
pub const DEFAULT_GRID_SIZE: usize = 200;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceSummary {
    pub n: usize,
    pub log_c_n: f64,
    /// Elevated plateaus along the center axis at the smallest half-width.
    pub plateaus_at_smallest_half_width: usize,
    pub sample: Vec<f64>,
    pub max_loglik: f64,
    pub argmax_center: f64,
    pub argmax_half_width: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceOutput {
    pub report: ExperimentReport<(), SurfaceSummary>,
    pub grid: SurfaceGrid,
}

pub fn run_surface(config: &ExperimentConfig) -> Result<SurfaceOutput> {
    let n = config.n.unwrap_or(DEFAULT_N);
    let size = config.grid_size.unwrap_or(DEFAULT_GRID_SIZE);
    if n == 0 || size < 2 {
        return invalid("surface needs n >= 1 and grid_size >= 2");
    }
    let (background, (_, free_weight)) = config.two_component_split()?;
    let sample = draw_sample_stream(&config.truth, n, config.seed, cell_stream(0, 0))?;
    let bounds = support_bounds(&config.truth);
    let ln_c = config.schedule.ln_c_n(n as u64);
    if ln_c.exp() < f64::MIN_POSITIVE {
        return invalid(format!("c_n = exp({ln_c}) underflows; the surface needs a representable half-width"));
    }
    let grid = GridSpec {
        centers: GridSpec::sample_adapted_centers(&sample, bounds.l_min, bounds.l_max, size.max(3 * n)),
        half_widths: GridSpec::log_spaced(ln_c, bounds.length.ln(), size),
    };
    let surface = surface_grid(free_weight, background, &sample, &grid)?;
    Ok(SurfaceOutput { report: summarize(config, n, ln_c, &sample, &surface), grid: surface })
}

fn summarize(config: &ExperimentConfig, n: usize, ln_c: f64, sample: &SampleSet, surface: &SurfaceGrid) -> ExperimentReport<(), SurfaceSummary> {
    let mut best = (f64::NEG_INFINITY, 0, 0);
    for (i, row) in surface.values.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            if *v > best.0 {
                best = (*v, i, j);
            }
        }
    }
    let summary = SurfaceSummary {
        n,
        log_c_n: ln_c,
        plateaus_at_smallest_half_width: count_elevated_plateaus(&surface.column(0)),
        sample: sample.values().to_vec(),
        max_loglik: best.0,
        argmax_center: surface.center_axis[best.1],
        argmax_half_width: surface.half_width_axis[best.2],
    };
    ExperimentReport::new("surface", config, Vec::new(), summary)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_plateau_per_observation() {
        let cfg = ExperimentConfig { n: Some(12), grid_size: Some(40), ..Default::default() };
        let out = run_surface(&cfg).unwrap();
        assert_eq!(out.report.summary.plateaus_at_smallest_half_width, 12);
        assert_eq!(out.grid.half_width_axis.len(), 40);
        assert!(out.grid.center_axis.len() >= 36);
        // the best cell is a spike at the smallest half-width
        assert_eq!(out.report.summary.argmax_half_width, out.grid.half_width_axis[0]);
    }
}
