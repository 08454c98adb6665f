//! Domain types for finite mixtures of uniform densities.
//!
//! Every component is uniform on the half-open interval
//! `[center - half_width, center + half_width)`. The half-width is kept in
//! log scale as well as linear scale, because constraint schedules such as
//! `exp(-n log n)` fall below the smallest positive double long before the
//! interesting sample sizes are reached.

use std::cmp::Ordering;
use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::theory;

/// Absolute tolerance on the weight sum and on the total mass of a step density.
pub const MASS_TOLERANCE: f64 = 1e-12;

/// A half-open interval `[lo, hi)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn is_empty(&self) -> bool {
        self.hi <= self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x < self.hi
    }

    pub fn intersects(&self, other: &Interval) -> bool {
        self.lo < other.hi && other.lo < self.hi
    }
}

/// A union of disjoint half-open intervals, sorted ascending.
///
/// Construction merges overlapping and abutting pieces, so two sets covering
/// the same points compare equal.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IntervalSet {
    intervals: Vec<Interval>,
}

impl IntervalSet {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn from_intervals(mut pieces: Vec<Interval>) -> Self {
        pieces.retain(|iv| !iv.is_empty());
        pieces.sort_by(|a, b| a.lo.total_cmp(&b.lo));
        let mut merged: Vec<Interval> = Vec::with_capacity(pieces.len());
        for iv in pieces {
            match merged.last_mut() {
                Some(last) if iv.lo <= last.hi => last.hi = last.hi.max(iv.hi),
                _ => merged.push(iv),
            }
        }
        Self { intervals: merged }
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn total_length(&self) -> f64 {
        self.intervals.iter().map(Interval::len).sum()
    }

    pub fn contains(&self, x: f64) -> bool {
        let idx = self.intervals.partition_point(|iv| iv.hi <= x);
        self.intervals.get(idx).is_some_and(|iv| iv.contains(x))
    }
}

/// One uniform component `U[center - half_width, center + half_width)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformComponent {
    center: f64,
    half_width: f64,
    ln_half_width: f64,
}

impl UniformComponent {
    pub fn new(center: f64, half_width: f64) -> Result<Self> {
        if !center.is_finite() {
            return invalid(format!("component center must be finite, got {center}"));
        }
        if !(half_width > 0.0 && half_width.is_finite()) {
            return invalid(format!("component half-width must be positive and finite, got {half_width}"));
        }
        Ok(Self { center, half_width, ln_half_width: half_width.ln() })
    }

    /// Builds a component from `log(half_width)`; the linear half-width may
    /// underflow to zero, the component stays valid.
    pub fn from_ln_half_width(center: f64, ln_half_width: f64) -> Result<Self> {
        if !center.is_finite() {
            return invalid(format!("component center must be finite, got {center}"));
        }
        if !ln_half_width.is_finite() || ln_half_width >= f64::MAX.ln() {
            return invalid(format!("log half-width must be finite, got {ln_half_width}"));
        }
        Ok(Self { center, half_width: ln_half_width.exp(), ln_half_width })
    }

    /// The uniform density on `[lo, hi)`.
    pub fn spanning(lo: f64, hi: f64) -> Result<Self> {
        if !(hi > lo) {
            return invalid(format!("empty interval [{lo}, {hi})"));
        }
        Self::new(lo + (hi - lo) / 2.0, (hi - lo) / 2.0)
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn ln_half_width(&self) -> f64 {
        self.ln_half_width
    }

    pub fn lower(&self) -> f64 {
        self.center - self.half_width
    }

    pub fn upper(&self) -> f64 {
        self.center + self.half_width
    }

    /// False when the half-width is below the floating-point resolution at
    /// the center, i.e. `center ± half_width` rounds back onto `center`.
    pub fn is_resolved(&self) -> bool {
        self.lower() < self.center && self.center < self.upper()
    }

    /// The representable support. Unresolved components collapse onto the
    /// single cell `[center, next_up(center))`, which holds exactly the one
    /// double their true support contains.
    pub fn cell(&self) -> Interval {
        if self.is_resolved() {
            Interval::new(self.lower(), self.upper())
        } else {
            Interval::new(self.center, self.center.next_up())
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.cell().contains(x)
    }

    /// `1 / (2 b)`; infinite when the half-width has underflowed.
    pub fn height(&self) -> f64 {
        0.5 / self.half_width
    }

    pub fn ln_height(&self) -> f64 {
        -LN_2 - self.ln_half_width
    }
}

#[derive(Serialize, Deserialize)]
struct ComponentRepr {
    center: f64,
    #[serde(default)]
    half_width: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    log_half_width: Option<f64>,
}

impl Serialize for UniformComponent {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let resolved_linear = self.half_width > 0.0 && self.half_width.ln() == self.ln_half_width;
        ComponentRepr {
            center: self.center,
            half_width: Some(self.half_width),
            log_half_width: (!resolved_linear).then_some(self.ln_half_width),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for UniformComponent {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = ComponentRepr::deserialize(deserializer)?;
        let built = match (repr.log_half_width, repr.half_width) {
            (Some(ln_b), _) => Self::from_ln_half_width(repr.center, ln_b),
            (None, Some(b)) => Self::new(repr.center, b),
            (None, None) => invalid("component needs half_width or log_half_width"),
        };
        built.map_err(serde::de::Error::custom)
    }
}

/// A full parameter point: mixing weights and components.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ParamsRepr")]
pub struct MixtureParams {
    weights: Vec<f64>,
    components: Vec<UniformComponent>,
}

#[derive(Deserialize)]
struct ParamsRepr {
    weights: Vec<f64>,
    components: Vec<UniformComponent>,
}

impl TryFrom<ParamsRepr> for MixtureParams {
    type Error = Error;
    fn try_from(repr: ParamsRepr) -> Result<Self> {
        Self::new(repr.weights, repr.components)
    }
}

impl MixtureParams {
    pub fn new(weights: Vec<f64>, components: Vec<UniformComponent>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidParams("a mixture needs at least one component".into()));
        }
        if weights.len() != components.len() {
            return Err(Error::InvalidParams(format!(
                "{} weights for {} components",
                weights.len(),
                components.len()
            )));
        }
        if let Some(w) = weights.iter().find(|w| !(**w >= 0.0 && w.is_finite())) {
            return Err(Error::InvalidParams(format!("weight {w} is not a nonnegative real")));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::InvalidParams(format!("weights sum to {total}, not 1")));
        }
        Ok(Self { weights, components })
    }

    pub fn single(component: UniformComponent) -> Self {
        Self { weights: vec![1.0], components: vec![component] }
    }

    /// Convenience constructor from `(weight, center, half_width)` triples.
    pub fn from_triples(triples: &[(f64, f64, f64)]) -> Result<Self> {
        let components = triples
            .iter()
            .map(|&(_, a, b)| UniformComponent::new(a, b))
            .collect::<Result<Vec<_>>>()?;
        Self::new(triples.iter().map(|t| t.0).collect(), components)
    }

    pub fn num_components(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn components(&self) -> &[UniformComponent] {
        &self.components
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &UniformComponent)> {
        self.weights.iter().copied().zip(self.components.iter())
    }

    /// Same components, new weights.
    pub fn with_weights(&self, weights: Vec<f64>) -> Result<Self> {
        Self::new(weights, self.components.clone())
    }
}

/// Extent of a mixture's support.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupportBounds {
    pub l_min: f64,
    pub l_max: f64,
    pub length: f64,
}

impl SupportBounds {
    pub fn new(l_min: f64, l_max: f64) -> Result<Self> {
        if !(l_min < l_max) || !l_min.is_finite() || !l_max.is_finite() {
            return invalid(format!("support bounds need l_min < l_max, got ({l_min}, {l_max})"));
        }
        Ok(Self { l_min, l_max, length: l_max - l_min })
    }
}

/// A realized constrained parameter space: half-widths in
/// `[c_lower, half_width_cap]`, centers in `center_box`.
///
/// The lower bound is stored as a logarithm so that schedules far below the
/// double range remain usable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpaceRepr", into = "SpaceRepr")]
pub struct ConstraintSpace {
    ln_c_lower: f64,
    /// The linear bound as given, so that a boundary component has exactly
    /// this half-width; `exp(ln_c_lower)` when built from a logarithm.
    c_lower: f64,
    center_box: (f64, f64),
    half_width_cap: f64,
}

#[derive(Serialize, Deserialize)]
struct SpaceRepr {
    #[serde(default)]
    c_lower: Option<f64>,
    #[serde(default)]
    log_c_lower: Option<f64>,
    center_box: (f64, f64),
    half_width_cap: f64,
}

impl TryFrom<SpaceRepr> for ConstraintSpace {
    type Error = Error;
    fn try_from(repr: SpaceRepr) -> Result<Self> {
        match (repr.c_lower, repr.log_c_lower) {
            (Some(c), _) if c >= f64::MIN_POSITIVE => Self::new(c, repr.center_box, repr.half_width_cap),
            (_, Some(ln_c)) => Self::with_ln_lower(ln_c, repr.center_box, repr.half_width_cap),
            _ => invalid("constraint space needs a positive c_lower or a finite log_c_lower"),
        }
    }
}

impl From<ConstraintSpace> for SpaceRepr {
    fn from(space: ConstraintSpace) -> Self {
        Self {
            c_lower: Some(space.c_lower),
            log_c_lower: Some(space.ln_c_lower),
            center_box: space.center_box,
            half_width_cap: space.half_width_cap,
        }
    }
}

impl ConstraintSpace {
    pub fn new(c_lower: f64, center_box: (f64, f64), half_width_cap: f64) -> Result<Self> {
        if !(c_lower > 0.0) {
            return invalid(format!("c_lower must be positive, got {c_lower}"));
        }
        let mut space = Self::with_ln_lower(c_lower.ln(), center_box, half_width_cap)?;
        space.c_lower = c_lower;
        Ok(space)
    }

    pub fn with_ln_lower(ln_c_lower: f64, center_box: (f64, f64), half_width_cap: f64) -> Result<Self> {
        if !ln_c_lower.is_finite() {
            return invalid(format!("log c_lower must be finite, got {ln_c_lower}"));
        }
        if !(half_width_cap > 0.0) || ln_c_lower > half_width_cap.ln() {
            return invalid(format!("need 0 < c_lower <= half_width_cap (log c_lower = {ln_c_lower}, cap = {half_width_cap})"));
        }
        if !(center_box.0 <= center_box.1) {
            return invalid(format!("empty center box {center_box:?}"));
        }
        Ok(Self { ln_c_lower, c_lower: ln_c_lower.exp(), center_box, half_width_cap })
    }

    /// The bounded parameter box: centers in `[l_min, l_max]`,
    /// half-widths capped at `length`.
    pub fn for_support(bounds: SupportBounds, ln_c_lower: f64) -> Result<Self> {
        Self::with_ln_lower(ln_c_lower, (bounds.l_min, bounds.l_max), bounds.length)
    }

    pub fn ln_c_lower(&self) -> f64 {
        self.ln_c_lower
    }

    /// Linear lower bound; zero when it underflows (see [`Self::c_lower_underflows`]).
    pub fn c_lower(&self) -> f64 {
        self.c_lower
    }

    pub fn c_lower_underflows(&self) -> bool {
        self.c_lower() < f64::MIN_POSITIVE
    }

    pub fn center_box(&self) -> (f64, f64) {
        self.center_box
    }

    pub fn half_width_cap(&self) -> f64 {
        self.half_width_cap
    }

    /// Same box and cap, different lower bound.
    pub fn with_lower(&self, ln_c_lower: f64) -> Result<Self> {
        Self::with_ln_lower(ln_c_lower, self.center_box, self.half_width_cap)
    }

    /// The lower bound as a component half-width: linear when representable
    /// and consistent with the logarithm, otherwise log-scale only.
    pub fn boundary_component(&self, center: f64) -> Result<UniformComponent> {
        boundary_component(center, self.ln_c_lower, self.c_lower)
    }

    pub fn admits(&self, component: &UniformComponent) -> bool {
        component.ln_half_width() >= self.ln_c_lower
            && component.half_width() <= self.half_width_cap
            && self.center_box.0 <= component.center()
            && component.center() <= self.center_box.1
    }
}

/// A component of half-width exactly `c` (given as `ln_c` and its linear
/// value) at `center`, preferring the linear value so the stored width
/// matches the caller's constant bit for bit.
pub(crate) fn boundary_component(center: f64, ln_c: f64, c: f64) -> Result<UniformComponent> {
    if c >= f64::MIN_POSITIVE && c.ln() >= ln_c {
        UniformComponent::new(center, c)
    } else {
        UniformComponent::from_ln_half_width(center, ln_c)
    }
}

/// Canonical step-function form of a mixture density: heights on the
/// half-open cells between consecutive breakpoints, zero outside.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseDensity {
    breakpoints: Vec<f64>,
    heights: Vec<f64>,
}

impl PiecewiseDensity {
    /// Validates and canonicalizes (merges equal neighbours, trims zero ends).
    pub fn new(breakpoints: Vec<f64>, heights: Vec<f64>) -> Result<Self> {
        if breakpoints.len() < 2 || heights.len() + 1 != breakpoints.len() {
            return invalid("a step density needs k + 1 breakpoints for k heights, k >= 1");
        }
        if breakpoints.windows(2).any(|w| !(w[0] < w[1])) {
            return invalid("breakpoints must be strictly increasing");
        }
        if heights.iter().any(|h| !(*h >= 0.0)) {
            return invalid("heights must be nonnegative");
        }
        let density = Self::canonical(breakpoints, heights);
        let mass = density.mass();
        if (mass - 1.0).abs() > MASS_TOLERANCE {
            return invalid(format!("step density integrates to {mass}, not 1"));
        }
        Ok(density)
    }

    fn canonical(breakpoints: Vec<f64>, heights: Vec<f64>) -> Self {
        let mut bps = vec![breakpoints[0]];
        let mut hs: Vec<f64> = Vec::with_capacity(heights.len());
        for (t, h) in heights.iter().copied().enumerate() {
            if hs.last() == Some(&h) {
                *bps.last_mut().unwrap() = breakpoints[t + 1];
            } else {
                hs.push(h);
                bps.push(breakpoints[t + 1]);
            }
        }
        while hs.len() > 1 && hs[0] == 0.0 {
            hs.remove(0);
            bps.remove(0);
        }
        while hs.len() > 1 && *hs.last().unwrap() == 0.0 {
            hs.pop();
            bps.pop();
        }
        Self { breakpoints: bps, heights: hs }
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn heights(&self) -> &[f64] {
        &self.heights
    }

    pub fn eval(&self, x: f64) -> f64 {
        // index of the last breakpoint <= x
        let idx = self.breakpoints.partition_point(|b| *b <= x);
        if idx == 0 || idx == self.breakpoints.len() {
            0.0
        } else {
            self.heights[idx - 1]
        }
    }

    /// `(cell, height)` pairs, including interior zero-height gaps.
    pub fn cells(&self) -> impl Iterator<Item = (Interval, f64)> + '_ {
        self.breakpoints
            .windows(2)
            .zip(self.heights.iter())
            .map(|(w, h)| (Interval::new(w[0], w[1]), *h))
    }

    /// Number of cells with positive height, `T(θ)`.
    pub fn positive_cells(&self) -> usize {
        self.heights.iter().filter(|h| **h > 0.0).count()
    }

    pub fn mass(&self) -> f64 {
        self.cells().map(|(iv, h)| h * iv.len()).sum()
    }

    /// Largest height, `u = max f`.
    pub fn max_height(&self) -> f64 {
        self.heights.iter().copied().fold(0.0, f64::max)
    }

    /// `E[log f(X)]` for `X` drawn from this density.
    pub fn expected_log_density(&self) -> f64 {
        self.cells().filter(|(_, h)| *h > 0.0).map(|(iv, h)| h * iv.len() * h.ln()).sum()
    }

    /// Probability mass of a half-open interval.
    pub fn mass_in(&self, window: Interval) -> f64 {
        self.cells()
            .map(|(iv, h)| {
                let overlap = iv.hi.min(window.hi) - iv.lo.max(window.lo);
                h * overlap.max(0.0)
            })
            .sum()
    }
}

/// `f(x; θ) = Σ α_m / (2 b_m) · 1[a_m - b_m <= x < a_m + b_m]`.
pub fn density_at(params: &MixtureParams, x: f64) -> f64 {
    params
        .iter()
        .filter(|(_, c)| c.contains(x))
        .map(|(w, c)| w * c.height())
        .sum()
}

/// Canonical step form of the mixture density.
///
/// Components narrower than the floating-point resolution at their center
/// are drawn on their single representable cell with their full mass, so the
/// result still integrates to one; for every resolved component the step
/// function agrees with [`density_at`] everywhere.
pub fn to_piecewise(params: &MixtureParams) -> PiecewiseDensity {
    let live: Vec<(f64, Interval, f64)> = params
        .iter()
        .filter(|(w, _)| *w > 0.0)
        .map(|(w, c)| {
            let cell = c.cell();
            let height = if c.is_resolved() { c.height() } else { 1.0 / cell.len() };
            (w, cell, height)
        })
        .collect();

    let mut bps: Vec<f64> = live.iter().flat_map(|(_, cell, _)| [cell.lo, cell.hi]).collect();
    bps.sort_by(f64::total_cmp);
    bps.dedup();

    let heights = bps
        .windows(2)
        .map(|w| {
            live.iter()
                .filter(|(_, cell, _)| cell.contains(w[0]))
                .map(|(wt, _, h)| wt * h)
                .sum()
        })
        .collect();
    PiecewiseDensity::canonical(bps, heights)
}

/// `L_min`, `L_max` and `L` over all components.
pub fn support_bounds(params: &MixtureParams) -> SupportBounds {
    let l_min = params.components().iter().map(|c| c.lower()).fold(f64::INFINITY, f64::min);
    let l_max = params.components().iter().map(|c| c.upper()).fold(f64::NEG_INFINITY, f64::max);
    SupportBounds { l_min, l_max, length: l_max - l_min }
}

/// Moves every component into the box `[l_min, l_max]` without lowering the
/// density anywhere on `[l_min, l_max)`.
///
/// A support that meets the box is clipped to it (the height can only
/// rise). A support disjoint from the box is replaced by an interval of the
/// same width, capped at `length`, flush against the nearest box edge; the
/// original contributed nothing on the box.
pub fn project_to_bounds(params: &MixtureParams, bounds: &SupportBounds) -> MixtureParams {
    let components = params
        .components()
        .iter()
        .map(|c| project_component(c, bounds))
        .collect();
    MixtureParams { weights: params.weights.clone(), components }
}

fn project_component(c: &UniformComponent, bounds: &SupportBounds) -> UniformComponent {
    let cell = c.cell();
    let inside = bounds.l_min <= cell.lo
        && cell.hi <= bounds.l_max
        && c.half_width() <= bounds.length
        && (bounds.l_min..=bounds.l_max).contains(&c.center());
    if inside {
        return *c;
    }
    let lo = cell.lo.max(bounds.l_min);
    let hi = cell.hi.min(bounds.l_max);
    if lo < hi {
        return covering_component(lo, hi);
    }
    let width = (2.0 * c.half_width()).min(bounds.length);
    if cell.lo >= bounds.l_max {
        covering_component(bounds.l_max - width, bounds.l_max)
    } else {
        covering_component(bounds.l_min, bounds.l_min + width)
    }
}

/// Narrowest component whose cell is at least `[lo, hi)`.
fn covering_component(lo: f64, hi: f64) -> UniformComponent {
    let center = lo + (hi - lo) / 2.0;
    let mut half = (hi - lo) / 2.0;
    while center - half > lo || center + half < hi {
        half = half.next_up();
    }
    UniformComponent::new(center, half).expect("nonempty interval")
}

/// Membership in the constrained space `Θ_n` (boundaries included).
pub fn in_constraint_space(params: &MixtureParams, space: &ConstraintSpace) -> bool {
    params.components().iter().all(|c| space.admits(c))
}

/// `K(θ)`: number of components with half-width at most `c0`.
pub fn small_component_count(params: &MixtureParams, c0: f64) -> usize {
    params.components().iter().filter(|c| c.half_width() <= c0).count()
}

/// `J(θ)`: union of the supports of the small components with positive weight.
pub fn small_support(params: &MixtureParams, c0: f64) -> IntervalSet {
    IntervalSet::from_intervals(
        params
            .iter()
            .filter(|(w, c)| *w > 0.0 && c.half_width() <= c0)
            .map(|(_, c)| c.cell())
            .collect(),
    )
}

/// `τ_n(θ)`: how many of the ascending-sorted step heights stay at or below
/// `M / (2 c_n')` with `c_n' = c0 · exp(-n^{1/4})`.
pub fn tau_threshold(params: &MixtureParams, n: u64, c0: f64) -> usize {
    let heights: Vec<f64> = to_piecewise(params)
        .heights()
        .iter()
        .copied()
        .filter(|h| *h > 0.0)
        .collect();
    tau_threshold_for_heights(&heights, params.num_components(), n, c0)
}

/// [`tau_threshold`] on an explicit list of positive step heights.
pub fn tau_threshold_for_heights(heights: &[f64], num_components: usize, n: u64, c0: f64) -> usize {
    let ln_threshold = (num_components as f64).ln() - LN_2 - theory::c_n_prime(c0, n);
    let mut sorted = heights.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    sorted.partition_point(|h| h.ln() <= ln_threshold)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_comp() -> MixtureParams {
        MixtureParams::from_triples(&[(0.6, 0.5, 0.5), (0.4, 0.6, 0.2)]).unwrap()
    }

    #[test]
    fn density_examples() {
        let p = two_comp();
        assert!((density_at(&p, 0.5) - 1.6).abs() < 1e-15);
        assert_eq!(density_at(&p, 1.0), 0.0);
        let u = MixtureParams::single(UniformComponent::new(0.5, 0.5).unwrap());
        assert_eq!(density_at(&u, 0.5), 1.0);
        // left endpoint included, right excluded
        assert_eq!(density_at(&u, 0.0), 1.0);
        assert_eq!(density_at(&u, 1.0), 0.0);
    }

    #[test]
    fn piecewise_examples() {
        let pw = to_piecewise(&two_comp());
        let expect_bp = [0.0, 0.4, 0.8, 1.0];
        assert_eq!(pw.breakpoints().len(), 4);
        for (a, b) in pw.breakpoints().iter().zip(expect_bp) {
            assert!((a - b).abs() < 1e-15);
        }
        let expect_h = [0.6, 1.6, 0.6];
        for (a, b) in pw.heights().iter().zip(expect_h) {
            assert!((a - b).abs() < 1e-12);
        }
        assert_eq!(pw.positive_cells(), 3);

        let single = to_piecewise(&MixtureParams::from_triples(&[(1.0, 0.5, 0.5)]).unwrap());
        assert_eq!(single.breakpoints(), &[0.0, 1.0]);
        assert_eq!(single.heights(), &[1.0]);

        let twin = to_piecewise(&MixtureParams::from_triples(&[(0.5, 0.5, 0.5), (0.5, 0.5, 0.5)]).unwrap());
        assert_eq!(twin.breakpoints(), &[0.0, 1.0]);
        assert_eq!(twin.heights(), &[1.0]);
    }

    #[test]
    fn piecewise_keeps_interior_gaps() {
        let p = MixtureParams::from_triples(&[(0.5, 0.25, 0.25), (0.5, 2.25, 0.25)]).unwrap();
        let pw = to_piecewise(&p);
        assert_eq!(pw.heights(), &[1.0, 0.0, 1.0]);
        assert_eq!(pw.eval(1.0), 0.0);
        assert!((pw.mass() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn unresolved_component_keeps_its_mass() {
        let spike = UniformComponent::from_ln_half_width(0.3, -700.0).unwrap();
        assert!(!spike.is_resolved());
        assert!(spike.contains(0.3));
        assert!(!spike.contains(0.3f64.next_up()));
        let p = MixtureParams::new(vec![0.6, 0.4], vec![UniformComponent::new(0.5, 0.5).unwrap(), spike]).unwrap();
        assert!((to_piecewise(&p).mass() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn support_bounds_examples() {
        let b = support_bounds(&two_comp());
        assert_eq!((b.l_min, b.l_max), (0.0, 1.0));
        assert!((b.length - 1.0).abs() < 1e-15);
        let b = support_bounds(&MixtureParams::from_triples(&[(1.0, 0.6, 0.2)]).unwrap());
        assert!((b.l_min - 0.4).abs() < 1e-15 && (b.l_max - 0.8).abs() < 1e-15 && (b.length - 0.4).abs() < 1e-15);
        let b = support_bounds(&MixtureParams::from_triples(&[(1.0 / 3.0, 0.0, 1.0), (2.0 / 3.0, 0.0, 2.0)]).unwrap());
        assert_eq!((b.l_min, b.l_max, b.length), (-2.0, 2.0, 4.0));
    }

    #[test]
    fn projection_examples() {
        let bounds = SupportBounds::new(0.0, 1.0).unwrap();
        let outside = MixtureParams::from_triples(&[(0.5, 0.5, 0.5), (0.5, 1.5, 0.5)]).unwrap();
        let projected = project_to_bounds(&outside, &bounds);
        let moved = projected.components()[1];
        assert!(moved.lower() >= 0.0 && moved.upper() <= 1.0);
        assert!((0.0..=1.0).contains(&moved.center()));

        let wide = MixtureParams::from_triples(&[(1.0, 0.5, 2.0)]).unwrap();
        let projected = project_to_bounds(&wide, &bounds);
        let c = projected.components()[0];
        assert!((c.center() - 0.5).abs() < 1e-15 && (c.half_width() - 0.5).abs() < 1e-15);
        assert!(density_at(&projected, 0.3) > density_at(&wide, 0.3));

        let inside = two_comp();
        assert_eq!(project_to_bounds(&inside, &bounds), inside);
        assert_eq!(projected.weights(), wide.weights());
    }

    #[test]
    fn constraint_space_examples() {
        let space = ConstraintSpace::new(0.1, (0.0, 1.0), 1.0).unwrap();
        let ok = MixtureParams::from_triples(&[(0.5, 0.5, 0.2), (0.5, 0.5, 0.5)]).unwrap();
        let narrow = MixtureParams::from_triples(&[(0.5, 0.5, 0.05), (0.5, 0.5, 0.5)]).unwrap();
        let boundary = MixtureParams::from_triples(&[(0.5, 0.5, 0.1), (0.5, 0.5, 0.5)]).unwrap();
        assert!(in_constraint_space(&ok, &space));
        assert!(!in_constraint_space(&narrow, &space));
        assert!(in_constraint_space(&boundary, &space));
        assert!(ConstraintSpace::new(0.0, (0.0, 1.0), 1.0).is_err());
        assert!(ConstraintSpace::new(2.0, (0.0, 1.0), 1.0).is_err());
        assert!(ConstraintSpace::new(0.1, (1.0, 0.0), 1.0).is_err());
    }

    #[test]
    fn small_components() {
        let p = MixtureParams::from_triples(&[(0.5, 0.3, 1e-5), (0.5, 0.5, 0.5)]).unwrap();
        assert_eq!(small_component_count(&p, 0.1), 1);
        let p = MixtureParams::from_triples(&[(0.5, 0.3, 0.5), (0.5, 0.5, 0.5)]).unwrap();
        assert_eq!(small_component_count(&p, 0.1), 0);
        assert!(small_support(&p, 0.1).is_empty());
        let p = MixtureParams::from_triples(&[(0.3, 0.3, 0.01), (0.3, 0.3, 0.02), (0.4, 0.5, 0.5)]).unwrap();
        assert_eq!(small_component_count(&p, 0.1), 2);

        let p = MixtureParams::from_triples(&[(0.5, 0.3, 0.01), (0.5, 0.5, 0.5)]).unwrap();
        let j = small_support(&p, 0.1);
        assert_eq!(j.intervals().len(), 1);
        assert!((j.intervals()[0].lo - 0.29).abs() < 1e-15 && (j.intervals()[0].hi - 0.31).abs() < 1e-15);

        let p = MixtureParams::from_triples(&[(0.25, 0.3, 0.01), (0.25, 0.31, 0.01), (0.5, 0.5, 0.5)]).unwrap();
        let j = small_support(&p, 0.1);
        assert_eq!(j.intervals().len(), 1);
        assert!((j.intervals()[0].lo - 0.29).abs() < 1e-15 && (j.intervals()[0].hi - 0.32).abs() < 1e-15);

        // zero-weight components do not contribute
        let p = MixtureParams::from_triples(&[(0.0, 0.3, 0.01), (1.0, 0.5, 0.5)]).unwrap();
        assert_eq!(small_component_count(&p, 0.1), 1);
        assert!(small_support(&p, 0.1).is_empty());
    }

    #[test]
    fn tau_examples() {
        // threshold 2 / (2 · 0.1 · e^{-2}) ≈ 73.9
        assert_eq!(tau_threshold_for_heights(&[0.6, 1.6], 2, 16, 0.1), 2);
        assert_eq!(tau_threshold_for_heights(&[0.6, 1.6, 100.0], 2, 16, 0.1), 2);
        assert_eq!(tau_threshold_for_heights(&[80.0, 100.0], 2, 16, 0.1), 0);
        assert_eq!(tau_threshold(&two_comp(), 16, 0.1), 3);
    }

    #[test]
    fn params_validation_and_json() {
        assert!(MixtureParams::from_triples(&[(0.5, 0.5, 0.5)]).is_err());
        assert!(MixtureParams::from_triples(&[(1.0, 0.5, 0.0)]).is_err());
        assert!(MixtureParams::from_triples(&[(1.2, 0.5, 0.5), (-0.2, 0.5, 0.5)]).is_err());
        assert!(MixtureParams::new(vec![], vec![]).is_err());

        let p = two_comp();
        let text = serde_json::to_string(&p).unwrap();
        assert_eq!(
            text,
            r#"{"weights":[0.6,0.4],"components":[{"center":0.5,"half_width":0.5},{"center":0.6,"half_width":0.2}]}"#
        );
        let back: MixtureParams = serde_json::from_str(&text).unwrap();
        assert_eq!(back, p);
        assert!(serde_json::from_str::<MixtureParams>(r#"{"weights":[0.5],"components":[{"center":0,"half_width":1}]}"#).is_err());

        let spike = UniformComponent::from_ln_half_width(0.2, -5000.0).unwrap();
        let text = serde_json::to_string(&spike).unwrap();
        let back: UniformComponent = serde_json::from_str(&text).unwrap();
        assert_eq!(back.ln_half_width(), -5000.0);
    }

    #[test]
    fn interval_set_merges() {
        let set = IntervalSet::from_intervals(vec![
            Interval::new(0.5, 0.7),
            Interval::new(0.0, 0.2),
            Interval::new(0.2, 0.3),
            Interval::new(0.6, 0.9),
        ]);
        assert_eq!(set.intervals(), &[Interval::new(0.0, 0.3), Interval::new(0.5, 0.9)]);
        assert!(set.contains(0.25) && !set.contains(0.3) && set.contains(0.5) && !set.contains(0.9));
    }
}
