//! Constrained maximum-likelihood estimation over `Θ_n`.
//!
//! The likelihood of a uniform mixture depends on each component only
//! through the set of observations it covers and its width, so the search
//! runs over a finite family of run-covering intervals
//! ([`candidates`]), with the mixing weights solved per tuple
//! ([`weights`]). [`fit`] holds the profile, exhaustive and multistart
//! searches; [`distance`] the metrics used to judge consistency.

pub mod candidates;
pub mod distance;
pub mod fit;
pub mod weights;

pub use candidates::{candidate_intervals, candidate_intervals_in, candidate_intervals_ln, CandidateInterval, RunGeometry, RunSpan};
pub use distance::{density_l1_distance, param_distance, params_l1_distance};
pub use fit::{DEFAULT_EXACT_CAP, local_search, mle_exact, mle_multistart, mle_profile_single, ExactOptions, FitMode, FitResult};
pub use weights::{best_weights, optimize_two_weights, optimize_weights, WeightFit};
