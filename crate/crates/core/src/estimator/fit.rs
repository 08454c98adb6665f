//! Constrained maximum-likelihood fits over the candidate family.

use std::cmp::Ordering;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::candidates::{candidate_intervals_in, CandidateInterval, RunGeometry, RunSpan};
use super::weights::{best_weights, optimize_two_weights, DEFAULT_WEIGHT_TOL};
use crate::error::{Error, Result};
use crate::ext_real;
use crate::likelihood::log_add_exp;
use crate::model::{ConstraintSpace, MixtureParams, UniformComponent};
use crate::sampling::{stream_rng, SampleSet};

pub const DEFAULT_EXACT_CAP: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FitMode {
    Exact,
    Multistart,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub params: MixtureParams,
    #[serde(with = "ext_real")]
    pub loglik: f64,
    pub mode: FitMode,
    pub evaluations: u64,
    pub space: ConstraintSpace,
    /// Observation runs captured by the fitted free components.
    pub runs: Vec<RunSpan>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExactOptions {
    pub weight_tol: f64,
    pub n_cap: usize,
}

impl Default for ExactOptions {
    fn default() -> Self {
        Self { weight_tol: DEFAULT_WEIGHT_TOL, n_cap: DEFAULT_EXACT_CAP }
    }
}

fn mul_count(count: usize, value: f64) -> f64 {
    if count == 0 {
        0.0
    } else {
        count as f64 * value
    }
}

/// A scored tuple of candidates; ordering is by log-likelihood, then
/// smaller half-widths, smaller centers and lower run indices.
#[derive(Debug, Clone)]
struct Scored {
    loglik: f64,
    parts: Vec<CandidateInterval>,
    weights: Vec<f64>,
}

impl Scored {
    fn tie_key(&self) -> impl Iterator<Item = (f64, f64, usize, usize)> + '_ {
        self.parts
            .iter()
            .map(|c| (c.component.ln_half_width(), c.center(), c.run.start, c.run.end))
    }

    /// True when `self` should be preferred over `other`.
    fn beats(&self, other: &Scored) -> bool {
        match self.loglik.total_cmp(&other.loglik) {
            Ordering::Greater => true,
            Ordering::Less => false,
            Ordering::Equal => {
                for (a, b) in self.tie_key().zip(other.tie_key()) {
                    let ord = a
                        .0
                        .total_cmp(&b.0)
                        .then(a.1.total_cmp(&b.1))
                        .then(a.2.cmp(&b.2))
                        .then(a.3.cmp(&b.3));
                    if ord != Ordering::Equal {
                        return ord == Ordering::Less;
                    }
                }
                false
            }
        }
    }

    fn better(a: Option<Scored>, b: Option<Scored>) -> Option<Scored> {
        match (a, b) {
            (Some(a), Some(b)) => Some(if b.beats(&a) { b } else { a }),
            (a, None) => a,
            (None, b) => b,
        }
    }
}

/// Profile fit of the competing model: background and weights
/// fixed, the second component free over the candidate family of `space`.
pub fn mle_profile_single(
    sample: &SampleSet,
    background: UniformComponent,
    weights: (f64, f64),
    space: &ConstraintSpace,
) -> Result<FitResult> {
    if !(weights.0 >= 0.0 && weights.1 >= 0.0 && (weights.0 + weights.1 - 1.0).abs() <= 1e-12) {
        return Err(Error::InvalidArgument(format!("profile weights {weights:?} must be nonnegative and sum to 1")));
    }
    let xs = sample.values();
    let n = xs.len();
    let mut bg_prefix = vec![0usize; n + 1];
    for (i, x) in xs.iter().enumerate() {
        bg_prefix[i + 1] = bg_prefix[i] + background.contains(*x) as usize;
    }
    let bg_total = bg_prefix[n];
    let ln_bg = if weights.0 > 0.0 { weights.0.ln() + background.ln_height() } else { f64::NEG_INFINITY };
    let ln_w = weights.1.ln();
    let geometry = RunGeometry::for_space(xs, space);

    let (best, evaluations) = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut best: Option<Scored> = None;
            let mut evaluated = 0u64;
            for j in i..n {
                let Some(cand) = geometry.candidate(i, j) else { continue };
                if !space.admits(&cand.component) {
                    continue;
                }
                evaluated += 1;
                let len = j - i + 1;
                let bg_in = bg_prefix[j + 1] - bg_prefix[i];
                let ln_free = ln_w + cand.component.ln_height();
                let loglik = if bg_total - bg_in == n - len {
                    mul_count(bg_in, log_add_exp(ln_bg, ln_free))
                        + mul_count(len - bg_in, ln_free)
                        + mul_count(n - len, ln_bg)
                } else {
                    f64::NEG_INFINITY
                };
                let scored = Scored { loglik, parts: vec![cand], weights: vec![] };
                best = Scored::better(best, Some(scored));
            }
            (best, evaluated)
        })
        .reduce(|| (None, 0), |a, b| (Scored::better(a.0, b.0), a.1 + b.1));

    let best = best.ok_or_else(|| Error::InvalidArgument("no candidate interval lies in the constraint space".into()))?;
    let free = best.parts[0];
    let params = MixtureParams::new(vec![weights.0, weights.1], vec![background, free.component])?;
    Ok(FitResult { params, loglik: best.loglik, mode: FitMode::Exact, evaluations, space: *space, runs: vec![free.run] })
}

/// Exhaustive constrained MLE for `M ∈ {1, 2}`.
///
/// Any configuration leaving an observation uncovered has likelihood zero,
/// so only tuples whose runs jointly cover the whole sample are scored: for
/// `M = 2`, a prefix run together with an overlapping or abutting suffix
/// run, or the full run paired with anything.
pub fn mle_exact(sample: &SampleSet, m: usize, space: &ConstraintSpace, options: ExactOptions) -> Result<FitResult> {
    let n = sample.len();
    match m {
        1 | 2 => {}
        _ => return Err(Error::Unsupported(format!("exact search supports M = 1 or 2, got {m}"))),
    }
    if m == 2 && n > options.n_cap {
        return Err(Error::InstanceTooLarge { n, cap: options.n_cap });
    }
    let candidates: Vec<CandidateInterval> = candidate_intervals_in(sample, space);
    if candidates.is_empty() {
        return Err(Error::InvalidArgument("no candidate interval lies in the constraint space".into()));
    }
    let full = RunSpan::new(0, n - 1);

    let (best, evaluations) = if m == 1 {
        let best = candidates
            .iter()
            .map(|c| {
                let loglik = if c.run == full { n as f64 * c.component.ln_height() } else { f64::NEG_INFINITY };
                Scored { loglik, parts: vec![*c], weights: vec![1.0] }
            })
            .fold(None, |acc, s| Scored::better(acc, Some(s)));
        (best, candidates.len() as u64)
    } else {
        let prefixes: Vec<&CandidateInterval> = candidates.iter().filter(|c| c.run.start == 0).collect();
        let suffixes: Vec<&CandidateInterval> = candidates.iter().filter(|c| c.run.end == n - 1).collect();
        let fulls: Vec<&CandidateInterval> = prefixes.iter().copied().filter(|c| c.run == full).collect();
        let others: Vec<&CandidateInterval> = candidates.iter().filter(|c| c.run.end != n - 1).collect();

        let pairs: Vec<(&CandidateInterval, &CandidateInterval)> = prefixes
            .iter()
            .flat_map(|a| suffixes.iter().filter(move |b| b.run.start <= a.run.end + 1).map(move |b| (*a, *b)))
            .chain(fulls.iter().flat_map(|a| others.iter().map(move |b| (*a, *b))))
            .collect();
        let best = pairs
            .par_iter()
            .map(|(a, b)| score_pair(a, b, options.weight_tol))
            .fold(|| None, |acc, s| Scored::better(acc, Some(s)))
            .reduce(|| None, Scored::better);
        // no admissible covering pair: report the -inf fit on the first candidate
        let best = best.or_else(|| {
            Some(Scored { loglik: f64::NEG_INFINITY, parts: vec![candidates[0]; 2], weights: vec![0.5, 0.5] })
        });
        (best, pairs.len() as u64)
    };

    let best = best.expect("candidate family is nonempty");
    finish(best, FitMode::Exact, evaluations, space)
}

fn score_pair(a: &CandidateInterval, b: &CandidateInterval, tol: f64) -> Scored {
    let both = a.run.overlap(&b.run);
    let (alpha, loglik) = optimize_two_weights(
        a.run.len() - both,
        b.run.len() - both,
        both,
        a.component.ln_height(),
        b.component.ln_height(),
        tol,
    );
    Scored { loglik, parts: vec![*a, *b], weights: vec![alpha, 1.0 - alpha] }
}

fn finish(best: Scored, mode: FitMode, evaluations: u64, space: &ConstraintSpace) -> Result<FitResult> {
    let components = best.parts.iter().map(|c| c.component).collect();
    let params = MixtureParams::new(best.weights.clone(), components)?;
    Ok(FitResult {
        params,
        loglik: best.loglik,
        mode,
        evaluations,
        space: *space,
        runs: best.parts.iter().map(|c| c.run).collect(),
    })
}

/// Scores one assignment of runs to components with optimal weights.
struct RunScorer<'a> {
    sample: &'a SampleSet,
    geometry: RunGeometry<'a>,
    space: &'a ConstraintSpace,
    evaluations: u64,
}

impl RunScorer<'_> {
    fn score(&mut self, runs: &[RunSpan]) -> Option<Scored> {
        self.evaluations += 1;
        let parts = runs
            .iter()
            .map(|r| self.geometry.candidate(r.start, r.end).filter(|c| self.space.admits(&c.component)))
            .collect::<Option<Vec<_>>>()?;
        let supports: Vec<UniformComponent> = parts.iter().map(|c| c.component).collect();
        let (weights, loglik) = best_weights(self.sample, &supports, 1e-13).ok()?;
        Some(Scored { loglik, parts, weights })
    }
}

/// Hill climbing over run assignments from `start`: each sweep tries
/// growing, shrinking and shifting one component's run by one observation
/// and keeps the best improving move, until none improves.
pub fn local_search(sample: &SampleSet, space: &ConstraintSpace, start: &[RunSpan]) -> Result<FitResult> {
    let mut scorer = RunScorer {
        sample,
        geometry: RunGeometry::for_space(sample.values(), space),
        space,
        evaluations: 0,
    };
    let best = climb(&mut scorer, start.to_vec())
        .ok_or_else(|| Error::InvalidArgument("starting runs do not form an admissible covering".into()))?;
    finish(best, FitMode::Multistart, scorer.evaluations, space)
}

fn climb(scorer: &mut RunScorer<'_>, start: Vec<RunSpan>) -> Option<Scored> {
    let n = scorer.sample.len();
    let mut current = scorer.score(&start)?;
    let mut runs = start;
    loop {
        let mut improved: Option<(Scored, Vec<RunSpan>)> = None;
        for k in 0..runs.len() {
            for moved in neighbours(runs[k], n) {
                let mut trial = runs.clone();
                trial[k] = moved;
                if let Some(s) = scorer.score(&trial) {
                    let reference = improved.as_ref().map_or(&current, |(s, _)| s);
                    if s.loglik > reference.loglik {
                        improved = Some((s, trial));
                    }
                }
            }
        }
        match improved {
            Some((s, r)) => {
                current = s;
                runs = r;
            }
            None => return Some(current),
        }
    }
}

fn neighbours(run: RunSpan, n: usize) -> Vec<RunSpan> {
    let (s, e) = (run.start as isize, run.end as isize);
    let last = n as isize - 1;
    [(s - 1, e), (s + 1, e), (s, e - 1), (s, e + 1), (s - 1, e - 1), (s + 1, e + 1)]
        .into_iter()
        .filter(|(a, b)| *a >= 0 && *b <= last && a <= b)
        .map(|(a, b)| RunSpan::new(a as usize, b as usize))
        .collect()
}

/// Random covering start: `m` contiguous blocks cut at random positions
/// (blocks repeat when `m > n`).
fn random_start(n: usize, m: usize, rng: &mut impl Rng) -> Vec<RunSpan> {
    let mut cuts: Vec<usize> = Vec::new();
    while cuts.len() + 1 < m.min(n) {
        let c = rng.gen_range(1..n);
        if !cuts.contains(&c) {
            cuts.push(c);
        }
    }
    cuts.sort_unstable();
    let mut bounds = vec![0];
    bounds.extend(cuts);
    bounds.push(n);
    let mut runs: Vec<RunSpan> = bounds.windows(2).map(|w| RunSpan::new(w[0], w[1] - 1)).collect();
    while runs.len() < m {
        let s = rng.gen_range(0..n);
        let e = rng.gen_range(s..n);
        runs.push(RunSpan::new(s, e));
    }
    runs
}

/// Best of `restarts` local searches from random covering starts; start
/// `k` draws from stream `k` of `seed`, so more restarts only add starts.
pub fn mle_multistart(sample: &SampleSet, m: usize, space: &ConstraintSpace, restarts: usize, seed: u64) -> Result<FitResult> {
    if restarts == 0 {
        return Err(Error::InvalidArgument("at least one restart is required".into()));
    }
    if m == 0 {
        return Err(Error::InvalidArgument("M must be at least 1".into()));
    }
    let n = sample.len();
    let geometry = RunGeometry::for_space(sample.values(), space);
    let results: Vec<(Option<Scored>, u64)> = (0..restarts)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream_rng(seed, k as u64);
            let mut scorer = RunScorer { sample, geometry, space, evaluations: 0 };
            let mut found = None;
            // a handful of draws in case a start is not admissible
            for _ in 0..32 {
                let start = random_start(n, m, &mut rng);
                if let Some(s) = climb(&mut scorer, start) {
                    found = Some(s);
                    break;
                }
            }
            (found, scorer.evaluations)
        })
        .collect();
    let evaluations = results.iter().map(|r| r.1).sum();
    let best = results
        .into_iter()
        .fold(None, |acc, (s, _)| Scored::better(acc, s))
        .ok_or_else(|| Error::InvalidArgument("no admissible covering start found".into()))?;
    finish(best, FitMode::Multistart, evaluations, space)
}
