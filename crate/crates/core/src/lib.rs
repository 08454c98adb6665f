//! Constrained maximum-likelihood estimation for finite mixtures of
//! uniform distributions.
//!
//! The unconstrained likelihood of a uniform mixture is unbounded: a
//! component shrinking onto one observation sends it to infinity. Bounding
//! every half-width below by `c_n = c0 exp(-n^d)` restores a well-posed
//! problem whose maximizer is consistent when `c_n` shrinks slowly enough,
//! while a schedule such as `exp(-n log n)` lets the spikes win again.
//!
//! - [`model`]: components, mixtures, constraint spaces and step-function
//!   densities.
//! - [`sampling`]: seeded draws and sample sets.
//! - [`likelihood`]: log-domain likelihood, surfaces and spike competitors.
//! - [`estimator`]: the finite candidate family and the constrained MLE.
//! - [`theory`]: schedules, concentration bounds and covering checks.
//! - [`experiments`]: seeded studies behind the command-line front end.
//!
//! ```
//! use unimix::estimator::mle_profile_single;
//! use unimix::model::{ConstraintSpace, MixtureParams, UniformComponent};
//! use unimix::sampling::draw_sample;
//!
//! let truth = MixtureParams::from_triples(&[(0.6, 0.5, 0.5), (0.4, 0.6, 0.2)])?;
//! let sample = draw_sample(&truth, 500, 7)?;
//! let space = ConstraintSpace::new(1e-3, (0.0, 1.0), 1.0)?;
//! let background = UniformComponent::new(0.5, 0.5)?;
//! let fit = mle_profile_single(&sample, background, (0.6, 0.4), &space)?;
//! assert!(fit.params.components()[1].half_width() >= 1e-3);
//! # Ok::<(), unimix::Error>(())
//! ```

pub mod error;
pub mod estimator;
pub mod experiments;
pub mod ext_real;
pub mod likelihood;
pub mod model;
pub mod sampling;
pub mod theory;

pub use error::{Error, Result};

/// The guide under `book/`, compiled so that its examples run as doctests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/model.md")]
    mod model {}
    #[doc = include_str!("../../../book/src/likelihood.md")]
    mod likelihood {}
    #[doc = include_str!("../../../book/src/estimation.md")]
    mod estimation {}
    #[doc = include_str!("../../../book/src/theory.md")]
    mod theory {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
}
