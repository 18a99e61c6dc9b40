//! Solve, round, and certify the MAX-3-EQUAL semidefinite relaxation.
//!
//! MAX-3-EQUAL asks for a Boolean assignment making as many "three literals
//! all equal" constraints hold as possible. This crate implements the full
//! pipeline around its canonical SDP relaxation:
//!
//! - [`csp`]: instances, evaluation, exhaustive optimum, random generation;
//! - [`fourier`]: dense Boolean-cube functions, influences, noise operator;
//! - [`dist`]: the correlated-bit gadget distributions, in exact rationals;
//! - [`gaussian`]: trivariate orthant probabilities and PSD sampling;
//! - [`sdp`]: the Gram-matrix relaxation and its operator-splitting solver;
//! - [`rounding`]: sign rounding of correlated Gaussians, with closed-form
//!   expected values and the per-constraint ratio analysis;
//! - [`certify`]: Lipschitz-budgeted grid certification of the approximation
//!   constant near 0.796, plus the trigonometric fact suite behind it;
//! - [`dictatorship`]: test harnesses for the equality and AND testers.
//!
//! Data-parallel loops (Monte Carlo, grid scans, exhaustive search) run on
//! rayon when the default `parallel` feature is on and fall back to
//! sequential execution otherwise; results are bit-identical either way.

pub mod certify;
pub mod csp;
pub mod dictatorship;
pub mod dist;
pub mod error;
mod exec;
pub mod fourier;
pub mod gaussian;
pub mod rounding;
pub mod sdp;

pub use error::{Error, Result};
