//! A laboratory for the strong-law behaviour of sums of pairwise negatively
//! quadrant dependent (NQD) random variables under sharp normalizers.
//!
//! The crate has three kinds of machinery:
//!
//! * **Analytic layers** — [`scaling`] holds every deterministic sequence
//!   (clamped logs, truncation windows, maximal-inequality constants,
//!   normalizer/threshold/block families), [`marginals`] the distributions
//!   with closed-form tails and truncated moments, and [`truncation`] the
//!   three-way sample decomposition built on both.
//! * **Exact oracles** — [`dependence`] generates pairwise NQD paths and
//!   carries rational-arithmetic oracles for the NQD definition, the
//!   covariance sign property and the second-moment inequality on discrete
//!   joints.
//! * **Certification and simulation** — [`checker`] certifies the
//!   summability hypotheses of the strong law with exact partial sums plus
//!   rigorous analytic tail brackets, and [`simulator`] demonstrates the
//!   convergence rate on Monte-Carlo paths.
//!
//! The `nqdlab` CLI (its own crate) wires these together behind a small
//! key-value config format; see the book under `book/` for a guided tour.

pub mod checker;
pub mod dependence;
pub mod error;
pub mod marginals;
pub mod numerics;
pub mod scaling;
pub mod truncation;

pub use error::{Error, Result};
