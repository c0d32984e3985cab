//! Finite-instance laboratory for the one-sided ghost-gap machinery behind
//! VC symmetrization.
//!
//! A concept class is presented as a finite parameter list plus a total
//! evaluator `(θ, x) -> {0,1}`. On top of that the crate provides:
//!
//! * [`measure`]: finite domains, exact rational measures, seeded IID
//!   samplers and the exhaustive product-space enumerator.
//! * [`concept`]: empirical error, the one-sided ghost gap
//!   `L̂_T(h,c) − L̂_S(h,c)`, witness sets, the projected bad event
//!   `{p : ∃θ Γ ≥ ε/2}` and the supremum gap map.
//! * [`constructors`]: singleton witness classes, patching, fixed and
//!   family interpolation, fiber-product amalgamation.
//! * [`combinatorics`]: dichotomies, shattering, VC dimension, growth
//!   function and the Sauer–Shelah sum.
//! * [`symmetrization`]: exact and Monte Carlo bad-event probabilities,
//!   swap exchangeability, the symmetrization bound and PAC sample sizes.
//! * [`harness`]: JSON experiment configs, deterministic reports and the
//!   `ghostgap` command line driver.

pub mod combinatorics;
pub mod concept;
pub mod constructors;
mod error;
pub mod harness;
pub mod measure;
pub mod rational;
pub mod symmetrization;

pub use error::{Error, Result};
pub use rational::Rational;
