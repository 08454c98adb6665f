//! Log-likelihood evaluation, observation counts and likelihood surfaces.
//!
//! All arithmetic is in the log domain: a component of half-width `b`
//! contributes `log α - log 2 - log b`, which stays finite even when `b`
//! itself underflows.

use std::f64::consts::LN_2;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::ext_real::{self, format_ext};
use crate::model::{IntervalSet, MixtureParams, UniformComponent};
use crate::sampling::SampleSet;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogLikelihood {
    #[serde(with = "ext_real")]
    pub value: f64,
    pub n: usize,
}

impl LogLikelihood {
    pub fn per_observation(&self) -> f64 {
        self.value / self.n as f64
    }

    pub fn is_finite(&self) -> bool {
        self.value.is_finite()
    }
}

/// `log Σ exp(t)`; `-inf` for an empty or all-`-inf` input.
pub fn log_sum_exp(terms: &[f64]) -> f64 {
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY || max == f64::INFINITY {
        return max;
    }
    max + terms.iter().map(|t| (t - max).exp()).sum::<f64>().ln()
}

/// `log(exp(a) + exp(b))`.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// `log f(x; θ)`, `-inf` outside the support.
pub fn log_density_at(params: &MixtureParams, x: f64) -> f64 {
    let mut terms = [0.0f64; 8];
    let mut spill = Vec::new();
    let mut count = 0;
    for (w, c) in params.iter() {
        if w > 0.0 && c.contains(x) {
            let t = w.ln() + c.ln_height();
            if count < terms.len() {
                terms[count] = t;
            } else {
                spill.push(t);
            }
            count += 1;
        }
    }
    if spill.is_empty() {
        log_sum_exp(&terms[..count])
    } else {
        spill.extend_from_slice(&terms);
        log_sum_exp(&spill)
    }
}

/// `Σ_i log f(x_i; θ)`.
pub fn log_likelihood(params: &MixtureParams, sample: &SampleSet) -> LogLikelihood {
    let mut value = 0.0;
    for x in sample.values() {
        let ld = log_density_at(params, *x);
        if ld == f64::NEG_INFINITY {
            value = f64::NEG_INFINITY;
            break;
        }
        value += ld;
    }
    LogLikelihood { value, n: sample.len() }
}

/// `R_n(V)`: observations inside the interval set.
pub fn count_in(intervals: &IntervalSet, sample: &SampleSet) -> usize {
    let xs = sample.values();
    intervals
        .intervals()
        .iter()
        .map(|iv| xs.partition_point(|x| *x < iv.hi) - xs.partition_point(|x| *x < iv.lo))
        .sum()
}

/// Axes of a likelihood surface over `(center, half_width)` of the free component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub centers: Vec<f64>,
    pub half_widths: Vec<f64>,
}

impl GridSpec {
    /// `count` log-spaced half-widths from `lo` to `hi`, given as logarithms
    /// so that `lo` may lie below the double range.
    pub fn log_spaced(ln_lo: f64, ln_hi: f64, count: usize) -> Vec<f64> {
        if count == 1 {
            return vec![ln_lo.exp()];
        }
        (0..count)
            .map(|k| (ln_lo + (ln_hi - ln_lo) * k as f64 / (count - 1) as f64).exp())
            .collect()
    }

    pub fn linear(lo: f64, hi: f64, count: usize) -> Vec<f64> {
        if count == 1 {
            return vec![lo];
        }
        (0..count).map(|k| lo + (hi - lo) * k as f64 / (count - 1) as f64).collect()
    }

    /// A center axis of `total` points on `[lo, hi]` that contains every
    /// observation and the midpoint of every consecutive pair, topped up
    /// with an even grid. The spikes of the surface sit exactly on the
    /// observations, and the midpoints keep adjacent spikes apart.
    pub fn sample_adapted_centers(sample: &SampleSet, lo: f64, hi: f64, total: usize) -> Vec<f64> {
        let xs = sample.values();
        let mut axis: Vec<f64> = xs.to_vec();
        axis.extend(xs.windows(2).map(|w| w[0] + (w[1] - w[0]) / 2.0));
        let fill = total.saturating_sub(axis.len());
        axis.extend(Self::linear(lo, hi, fill.max(2)).into_iter().take(fill));
        axis.sort_by(f64::total_cmp);
        axis.dedup();
        axis
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceGrid {
    pub center_axis: Vec<f64>,
    pub half_width_axis: Vec<f64>,
    /// `values[i][j]` at `center_axis[i]`, `half_width_axis[j]`.
    pub values: Vec<Vec<f64>>,
}

impl SurfaceGrid {
    /// Header row holds the half-width axis, first column the center axis.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("center\\half_width");
        for b in &self.half_width_axis {
            out.push(',');
            out.push_str(&format_ext(*b));
        }
        out.push('\n');
        for (a, row) in self.center_axis.iter().zip(&self.values) {
            out.push_str(&format_ext(*a));
            for v in row {
                out.push(',');
                out.push_str(&format_ext(*v));
            }
            out.push('\n');
        }
        out
    }

    /// The surface as a function of the center at fixed half-width index.
    pub fn column(&self, j: usize) -> Vec<f64> {
        self.values.iter().map(|row| row[j]).collect()
    }
}

/// Log-likelihood of `(1 - w)·background + w·U(a, b)` over a grid of `(a, b)`.
pub fn surface_grid(
    fixed_weight: f64,
    background: UniformComponent,
    sample: &SampleSet,
    grid: &GridSpec,
) -> Result<SurfaceGrid> {
    if grid.centers.is_empty() || grid.half_widths.is_empty() {
        return invalid("surface grid axes must be nonempty");
    }
    if !(0.0..=1.0).contains(&fixed_weight) {
        return invalid(format!("weight {fixed_weight} outside [0, 1]"));
    }
    let values = grid
        .centers
        .par_iter()
        .map(|&a| {
            grid.half_widths
                .iter()
                .map(|&b| {
                    let free = UniformComponent::new(a, b)?;
                    let params = MixtureParams::new(vec![1.0 - fixed_weight, fixed_weight], vec![background, free])?;
                    Ok(log_likelihood(&params, sample).value)
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SurfaceGrid { center_axis: grid.centers.clone(), half_width_axis: grid.half_widths.clone(), values })
}

/// Number of maximal runs of consecutive entries strictly above the row
/// minimum: the disjoint elevated plateaus of a surface slice.
pub fn count_elevated_plateaus(row: &[f64]) -> usize {
    let floor = row.iter().copied().fold(f64::INFINITY, f64::min);
    let mut count = 0;
    let mut inside = false;
    for v in row {
        let elevated = *v > floor;
        if elevated && !inside {
            count += 1;
        }
        inside = elevated;
    }
    count
}

/// Best log-likelihood of a boundary model whose spike of half-width `c`
/// captures exactly one observation while the other `n - 1` see only the
/// background: `log{(1-α)h + α/(2c)} + (n-1) log{(1-α)h}`.
pub fn spike_competitor_loglik(background_height: f64, spike_weight: f64, c: f64, n: usize) -> Result<f64> {
    if !(c > 0.0) {
        return invalid(format!("spike half-width must be positive, got {c}"));
    }
    spike_competitor_loglik_ln(background_height, spike_weight, c.ln(), n)
}

/// [`spike_competitor_loglik`] with the half-width given as `log c`.
pub fn spike_competitor_loglik_ln(background_height: f64, spike_weight: f64, ln_c: f64, n: usize) -> Result<f64> {
    if n == 0 {
        return invalid("n must be at least 1");
    }
    if !(spike_weight > 0.0 && spike_weight < 1.0) {
        return invalid(format!("spike weight must lie in (0, 1), got {spike_weight}"));
    }
    if !(background_height > 0.0) {
        return invalid(format!("background height must be positive, got {background_height}"));
    }
    if !ln_c.is_finite() {
        return invalid(format!("log half-width must be finite, got {ln_c}"));
    }
    let ln_bg = (1.0 - spike_weight).ln() + background_height.ln();
    let ln_spike = spike_weight.ln() - LN_2 - ln_c;
    Ok(log_add_exp(ln_bg, ln_spike) + (n - 1) as f64 * ln_bg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{density_at, Interval};

    fn truth() -> MixtureParams {
        MixtureParams::from_triples(&[(0.6, 0.5, 0.5), (0.4, 0.6, 0.2)]).unwrap()
    }

    fn sample(xs: &[f64]) -> SampleSet {
        SampleSet::from_values(xs.to_vec()).unwrap()
    }

    #[test]
    fn loglik_examples() {
        let u = MixtureParams::from_triples(&[(1.0, 0.5, 0.5)]).unwrap();
        assert_eq!(log_likelihood(&u, &sample(&[0.1, 0.5, 0.99])).value, 0.0);

        let ll = log_likelihood(&truth(), &sample(&[0.5, 0.9])).value;
        assert!((ll - (-0.040822)).abs() < 1e-6, "{ll}");
        assert!((ll - (1.6f64.ln() + 0.6f64.ln())).abs() < 1e-12);

        let narrow = MixtureParams::from_triples(&[(1.0, 0.6, 0.2)]).unwrap();
        assert_eq!(log_likelihood(&narrow, &sample(&[0.9])).value, f64::NEG_INFINITY);
    }

    #[test]
    fn stable_path_beyond_double_range() {
        let spike = UniformComponent::from_ln_half_width(0.25, -2000.0).unwrap();
        let p = MixtureParams::new(vec![0.6, 0.4], vec![UniformComponent::new(0.5, 0.5).unwrap(), spike]).unwrap();
        let ll = log_likelihood(&p, &sample(&[0.25, 0.7])).value;
        let expect = log_add_exp(0.6f64.ln(), 0.4f64.ln() - LN_2 + 2000.0) + 0.6f64.ln();
        assert!((ll - expect).abs() < 1e-9);
        assert!(ll > 1990.0);
    }

    #[test]
    fn count_examples() {
        let s = sample(&[0.1, 0.2, 0.9]);
        assert_eq!(count_in(&IntervalSet::empty(), &s), 0);
        assert_eq!(count_in(&IntervalSet::from_intervals(vec![Interval::new(0.15, 0.95)]), &s), 2);
        assert_eq!(count_in(&IntervalSet::from_intervals(vec![Interval::new(0.0, 1.0)]), &s), 3);
        // half-open: right endpoint excluded
        assert_eq!(count_in(&IntervalSet::from_intervals(vec![Interval::new(0.1, 0.2)]), &s), 1);
    }

    #[test]
    fn spike_table_values() {
        let c = |n: f64| (-n.powf(0.93)).exp();
        assert!((spike_competitor_loglik(1.0, 0.4, c(10.0), 10).unwrap() - 2.305).abs() < 0.0005);
        assert!((spike_competitor_loglik(1.0, 0.4, c(100.0), 100).unwrap() - 20.26).abs() < 0.01);
        assert!((spike_competitor_loglik(1.0, 0.4, c(1000.0), 1000).unwrap() - 104.7).abs() < 0.1);
        assert!(spike_competitor_loglik(1.0, 0.4, 0.0, 10).is_err());
        assert!(spike_competitor_loglik(1.0, 0.4, -1.0, 10).is_err());
    }

    #[test]
    fn spike_matches_explicit_model() {
        // One point inside a spike of half-width 0.001, the rest on the background only.
        let xs = [0.05, 0.3, 0.31, 0.7, 0.95];
        let spike = UniformComponent::new(0.3, 0.001).unwrap();
        let p = MixtureParams::new(vec![0.6, 0.4], vec![UniformComponent::new(0.5, 0.5).unwrap(), spike]).unwrap();
        let direct = log_likelihood(&p, &sample(&xs)).value;
        let closed = spike_competitor_loglik(1.0, 0.4, 0.001, xs.len()).unwrap();
        assert!((direct - closed).abs() < 1e-9);
    }

    #[test]
    fn surface_examples() {
        let bg = UniformComponent::new(0.5, 0.5).unwrap();
        let s = crate::sampling::draw_sample(&truth(), 40, 3).unwrap();
        let grid = GridSpec { centers: vec![2.0, 0.5], half_widths: vec![0.01, 0.5, 0.8] };
        let surf = surface_grid(0.4, bg, &s, &grid).unwrap();
        // covers no observation
        assert!((surf.values[0][0] - 40.0 * 0.6f64.ln()).abs() < 1e-9);
        assert!((surf.values[0][0] - (-20.433)).abs() < 1e-3);
        // spans the whole support
        for (j, b) in [(1, 0.5f64), (2, 0.8)] {
            let expect = 40.0 * (0.6 + 0.4 / (2.0 * b)).ln();
            assert!((surf.values[1][j] - expect).abs() < 1e-9);
        }
        assert!(surface_grid(0.4, bg, &s, &GridSpec { centers: vec![], half_widths: vec![0.1] }).is_err());

        // every center in [0, 1] spans the support once b >= 1; at b = 0.5
        // only a = 0.5 does
        let wide = GridSpec { centers: GridSpec::linear(0.0, 1.0, 11), half_widths: vec![0.5, 1.0, 1.7] };
        let surf = surface_grid(0.4, bg, &s, &wide).unwrap();
        for (j, b) in [(1, 1.0f64), (2, 1.7)] {
            let expect = 40.0 * (0.6 + 0.4 / (2.0 * b)).ln();
            assert!(surf.column(j).iter().all(|v| (v - expect).abs() < 1e-9));
        }
        let at_half = surf.column(0);
        assert!(at_half.iter().any(|v| (v - at_half[5]).abs() > 1e-6));
    }

    #[test]
    fn plateau_count_toy() {
        let bg = UniformComponent::new(0.5, 0.5).unwrap();
        let s = sample(&[0.2, 0.5, 0.8]);
        let centers = GridSpec::sample_adapted_centers(&s, 0.0, 1.0, 50);
        let grid = GridSpec { centers, half_widths: vec![1e-6] };
        let surf = surface_grid(0.4, bg, &s, &grid).unwrap();
        assert_eq!(count_elevated_plateaus(&surf.column(0)), 3);
    }

    #[test]
    fn csv_writes_neg_inf() {
        let grid = SurfaceGrid { center_axis: vec![0.0], half_width_axis: vec![0.5], values: vec![vec![f64::NEG_INFINITY]] };
        assert_eq!(grid.to_csv(), "center\\half_width,0.5\n0,-inf\n");
    }

    #[test]
    fn naive_path_agrees_for_moderate_heights() {
        let s = crate::sampling::draw_sample(&truth(), 200, 9).unwrap();
        let naive: f64 = s.values().iter().map(|x| density_at(&truth(), *x).ln()).sum();
        assert!((log_likelihood(&truth(), &s).value - naive).abs() < 1e-9);
    }
}
