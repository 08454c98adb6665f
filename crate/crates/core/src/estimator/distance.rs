//! Distances between fitted and true mixtures.

use itertools::Itertools;

use crate::error::{Error, Result};
use crate::model::{to_piecewise, MixtureParams, PiecewiseDensity};

/// Exact `∫|p - q|` over the merged breakpoint partition.
pub fn density_l1_distance(p: &PiecewiseDensity, q: &PiecewiseDensity) -> f64 {
    let mut bps: Vec<f64> = p.breakpoints().iter().chain(q.breakpoints()).copied().collect();
    bps.sort_by(f64::total_cmp);
    bps.dedup();
    bps.windows(2)
        .map(|w| (p.eval(w[0]) - q.eval(w[0])).abs() * (w[1] - w[0]))
        .sum()
}

/// [`density_l1_distance`] between the step forms of two parameter points.
pub fn params_l1_distance(a: &MixtureParams, b: &MixtureParams) -> f64 {
    density_l1_distance(&to_piecewise(a), &to_piecewise(b))
}

/// Smallest Euclidean distance between the stacked `(α, a, b)` vectors over
/// all relabelings of `est`.
pub fn param_distance(est: &MixtureParams, truth: &MixtureParams) -> Result<f64> {
    let m = truth.num_components();
    if est.num_components() != m {
        return Err(Error::InvalidArgument(format!(
            "cannot compare {} components against {m}",
            est.num_components()
        )));
    }
    let sq = |i: usize, j: usize| -> f64 {
        let (ce, ct) = (est.components()[i], truth.components()[j]);
        (est.weights()[i] - truth.weights()[j]).powi(2)
            + (ce.center() - ct.center()).powi(2)
            + (ce.half_width() - ct.half_width()).powi(2)
    };
    let best = (0..m)
        .permutations(m)
        .map(|perm| perm.iter().enumerate().map(|(j, &i)| sq(i, j)).sum::<f64>())
        .fold(f64::INFINITY, f64::min);
    Ok(best.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(triples: &[(f64, f64, f64)]) -> MixtureParams {
        MixtureParams::from_triples(triples).unwrap()
    }

    #[test]
    fn l1_examples() {
        let a = to_piecewise(&p(&[(0.6, 0.5, 0.5), (0.4, 0.6, 0.2)]));
        assert_eq!(density_l1_distance(&a, &a), 0.0);
        let u = to_piecewise(&p(&[(1.0, 0.5, 0.5)]));
        let half = to_piecewise(&p(&[(1.0, 0.25, 0.25)]));
        assert!((density_l1_distance(&u, &half) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn reparameterization_has_zero_distance() {
        // (1/3)U(-1,1) + (2/3)U(-2,2) and (1/2)U(-2,1) + (1/2)U(-1,2)
        let a = p(&[(1.0 / 3.0, 0.0, 1.0), (2.0 / 3.0, 0.0, 2.0)]);
        let b = p(&[(0.5, -0.5, 1.5), (0.5, 0.5, 1.5)]);
        assert!(params_l1_distance(&a, &b) < 1e-12);
        assert!(param_distance(&a, &b).unwrap() > 0.1);
    }

    #[test]
    fn param_distance_examples() {
        let truth = p(&[(0.6, 0.5, 0.5), (0.4, 0.6, 0.2)]);
        assert_eq!(param_distance(&truth, &truth).unwrap(), 0.0);
        let swapped = p(&[(0.4, 0.6, 0.2), (0.6, 0.5, 0.5)]);
        assert_eq!(param_distance(&swapped, &truth).unwrap(), 0.0);
        let shifted = p(&[(0.7, 0.5, 0.5), (0.3, 0.6, 0.2)]);
        assert!((param_distance(&shifted, &truth).unwrap() - 0.02f64.sqrt()).abs() < 1e-12);
        assert!(param_distance(&p(&[(1.0, 0.5, 0.5)]), &truth).is_err());
    }
}
