//! Finite search set for the constrained MLE.
//!
//! With the set of covered observations fixed, the likelihood strictly
//! decreases in the width of a component, so only the narrowest admissible
//! interval for each contiguous run of sorted observations matters: the
//! tight span of the run, or the forced width `2 c_lower` when the run is
//! narrower than that.

use serde::{Deserialize, Serialize};

use crate::model::{boundary_component, ConstraintSpace, UniformComponent};
use crate::sampling::SampleSet;

/// Inclusive index range into the sorted sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct RunSpan {
    pub start: usize,
    pub end: usize,
}

impl RunSpan {
    pub fn new(start: usize, end: usize) -> Self {
        debug_assert!(start <= end);
        Self { start, end }
    }

    pub fn len(&self) -> usize {
        self.end - self.start + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn overlap(&self, other: &RunSpan) -> usize {
        let lo = self.start.max(other.start);
        let hi = self.end.min(other.end);
        if lo <= hi {
            hi - lo + 1
        } else {
            0
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CandidateInterval {
    pub run: RunSpan,
    pub component: UniformComponent,
}

impl CandidateInterval {
    pub fn center(&self) -> f64 {
        self.component.center()
    }

    pub fn half_width(&self) -> f64 {
        self.component.half_width()
    }
}

/// All candidates for `c_lower`, in `(start, end)` order.
pub fn candidate_intervals(sample: &SampleSet, c_lower: f64) -> Vec<CandidateInterval> {
    let xs = sample.values();
    collect_candidates(RunGeometry::with_linear(xs, c_lower.ln(), c_lower))
}

/// [`candidate_intervals`] with the lower bound given as a logarithm.
pub fn candidate_intervals_ln(sample: &SampleSet, ln_c_lower: f64) -> Vec<CandidateInterval> {
    collect_candidates(RunGeometry::new(sample.values(), ln_c_lower))
}

/// Candidates for the lower bound of `space` that `space` admits.
pub fn candidate_intervals_in(sample: &SampleSet, space: &ConstraintSpace) -> Vec<CandidateInterval> {
    let mut all = collect_candidates(RunGeometry::for_space(sample.values(), space));
    all.retain(|c| space.admits(&c.component));
    all
}

fn collect_candidates(geometry: RunGeometry<'_>) -> Vec<CandidateInterval> {
    let n = geometry.xs.len();
    (0..n)
        .flat_map(|i| (i..n).map(move |j| (i, j)))
        .filter_map(|(i, j)| geometry.candidate(i, j))
        .collect()
}

/// Precomputed constants for building run candidates over one sample.
#[derive(Debug, Clone, Copy)]
pub struct RunGeometry<'a> {
    xs: &'a [f64],
    ln_c: f64,
    c: f64,
}

impl<'a> RunGeometry<'a> {
    pub fn new(xs: &'a [f64], ln_c_lower: f64) -> Self {
        Self::with_linear(xs, ln_c_lower, ln_c_lower.exp())
    }

    /// Geometry whose forced components use the linear bound `c_lower`
    /// verbatim when it is consistent with `ln_c_lower`.
    pub fn with_linear(xs: &'a [f64], ln_c_lower: f64, c_lower: f64) -> Self {
        Self { xs, ln_c: ln_c_lower, c: c_lower }
    }

    pub fn for_space(xs: &'a [f64], space: &ConstraintSpace) -> Self {
        Self::with_linear(xs, space.ln_c_lower(), space.c_lower())
    }

    /// The component covering exactly observations `i..=j`, if one exists.
    pub fn candidate(&self, i: usize, j: usize) -> Option<CandidateInterval> {
        let xs = self.xs;
        let n = xs.len();
        // a run cannot split a group of tied observations
        if (i > 0 && xs[i - 1] == xs[i]) || (j + 1 < n && xs[j + 1] == xs[j]) {
            return None;
        }
        let half_span = (xs[j] - xs[i]) / 2.0;
        let component = if half_span > 0.0 && half_span >= self.c {
            self.tight(i, j, half_span)?
        } else {
            self.forced(i, j)?
        };
        Some(CandidateInterval { run: RunSpan::new(i, j), component })
    }

    fn captures_exactly(&self, c: &UniformComponent, i: usize, j: usize) -> bool {
        let xs = self.xs;
        c.contains(xs[i])
            && c.contains(xs[j])
            && !(i > 0 && c.contains(xs[i - 1]))
            && !(j + 1 < xs.len() && c.contains(xs[j + 1]))
    }

    /// Tight span; the half-width is nudged up until the half-open cell
    /// includes the run's right end. The nudge starts at one ulp of the
    /// half-width and doubles, so it overshoots by at most a couple of ulps
    /// of the endpoints even when the span is tiny next to them.
    fn tight(&self, i: usize, j: usize, half_span: f64) -> Option<UniformComponent> {
        let (left, right) = (self.xs[i], self.xs[j]);
        let center = left + half_span;
        let mut half = half_span;
        let mut step = half.next_up() - half;
        for _ in 0..128 {
            if center - half <= left && center + half > right {
                break;
            }
            half += step;
            step *= 2.0;
        }
        let c = UniformComponent::new(center, half).ok()?;
        self.captures_exactly(&c, i, j).then_some(c)
    }

    /// Forced width `2c`: the cell `[lo, lo + 2c)` must satisfy
    /// `prev < lo <= x_i` and `x_j < lo + 2c <= next`. Centered on the run
    /// midpoint when that is feasible, otherwise moved to the nearest
    /// closed end of the feasible range, or its middle.
    fn forced(&self, i: usize, j: usize) -> Option<UniformComponent> {
        let xs = self.xs;
        let n = xs.len();
        let c = self.c;
        let mid = xs[i] + (xs[j] - xs[i]) / 2.0;
        let build = |center: f64| {
            boundary_component(center, self.ln_c, self.c)
                .ok()
                .filter(|comp| self.captures_exactly(comp, i, j))
        };
        // below resolution the cell collapses onto the center itself
        if mid + c == mid || mid - c == mid {
            return build(mid);
        }
        let prev = if i > 0 { xs[i - 1] } else { f64::NEG_INFINITY };
        let next = if j + 1 < n { xs[j + 1] } else { f64::INFINITY };
        let lower = prev.max(xs[j] - 2.0 * c);
        let upper = xs[i].min(next - 2.0 * c);
        if !(lower < upper) {
            return None;
        }
        let preferred = mid - c;
        let middle = lower + (upper - lower) / 2.0;
        let first = if preferred > lower && preferred <= upper {
            preferred
        } else if preferred > upper {
            upper
        } else {
            middle
        };
        build(first + c).or_else(|| build(middle + c))
    }
}
