//! Concentration bounds for dependent random processes.
//!
//! The bounds are driven by Hellinger integrals and Renyi divergences between
//! the joint law of a process and the product of its marginals. Every quantity
//! is carried in natural-log form so that values of order `2^(n^2)` stay finite.
//!
//! Modules, bottom up:
//! - [`measures`]: finite distributions, log-domain arithmetic, divergences.
//! - [`kernels`]: Markov kernels, contraction coefficients, operator norms, spectra.
//! - [`scenarios`]: process specifications and the closed forms of the worked settings.
//! - [`tensorize`]: exact joint-vs-product oracle and tensorisation bounds.
//! - [`engine`]: McDiarmid-type bounds for dependent processes, routes, alpha search.
//! - [`baselines`]: competing bounds and crossover thresholds.
//! - [`harness`]: exact tails, path sampling, Monte Carlo estimates.
//! - [`report`]: serialization helpers for non-finite numbers.

pub mod baselines;
pub mod engine;
pub mod error;
pub mod harness;
pub mod kernels;
pub mod measures;
pub mod report;
pub mod scenarios;
pub mod tensorize;

pub use error::{Error, Result};
pub use measures::{Dist, LogValue};

/// Hoelder conjugate `alpha / (alpha - 1)`, with `beta = 1` at `alpha = inf`.
pub fn conjugate(alpha: f64) -> f64 {
    if alpha.is_infinite() {
        1.0
    } else {
        alpha / (alpha - 1.0)
    }
}

/// `1 / alpha`, zero at infinity.
pub(crate) fn inv(alpha: f64) -> f64 {
    if alpha.is_infinite() {
        0.0
    } else {
        1.0 / alpha
    }
}
