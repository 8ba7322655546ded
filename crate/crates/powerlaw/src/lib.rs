//! Simulation and analysis of SGD-like diffusions whose gradient-noise
//! covariance grows quadratically with distance from the minimum.
//!
//! The noise structure makes the stationary law heavy-tailed with an explicit
//! power-law index, changes barrier escape from exponential (Arrhenius) to
//! polynomial in the barrier height, and admits a closed-form PAC-Bayes
//! complexity term. This crate provides:
//!
//! - loss landscapes: quadratic basins, a 1-d double well, a two-parameter
//!   empirical toy loss ([`landscape`])
//! - the state-dependent noise model and minibatch noise scans ([`noise`])
//! - discrete-time integrators for SGD, Langevin, and power-law dynamics
//!   ([`dynamics`])
//! - closed-form stationary densities plus a Fokker-Planck residual check
//!   ([`stationary`])
//! - mean escape time formulas and Monte Carlo first-passage experiments
//!   ([`escape`])
//! - a maximum-likelihood tail-index fitter ([`tailfit`])
//! - PAC-Bayes generalization bounds ([`pacbayes`])
//! - a config-driven experiment runner behind the `powerlaw` binary
//!   ([`experiment`])
//!
//! Everything stochastic is reproducible: a master seed plus a stream index
//! determine every draw, independent of thread count.

pub mod dynamics;
pub mod error;
pub mod escape;
pub mod experiment;
pub mod landscape;
pub mod noise;
pub mod numeric;
pub mod pacbayes;
pub mod rng;
pub mod stationary;
pub mod tailfit;

pub use error::{Error, Result};
