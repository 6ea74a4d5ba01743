//! Quantile-based fractional generalized cumulative past entropy.
//!
//! The crate evaluates
//!
//! ```text
//! CPξ_Q^η(X)    = Γ(η+1)^{-1} ∫₀¹ p (-ln p)^η q(p) dp
//! CPξ_Q^η(X, v) = (v Γ(η+1))^{-1} ∫₀^v p (ln v - ln p)^η q(p) dp
//! ```
//!
//! for lifetime models given through their quantile function `Q` and quantile
//! density `q = Q'`, estimates the static measure nonparametrically from
//! order statistics, and ships the simulation, stochastic-ordering and
//! logistic-map studies built on top of it.

#![allow(clippy::excessive_precision, clippy::neg_cmp_op_on_partial_ord)]

pub mod chaos;
pub mod entropy;
pub mod error;
pub mod estimator;
pub mod models;
pub mod orderings;
pub mod montecarlo;
pub mod quadrature;
pub mod rng;
pub mod sample;
pub mod special;

pub use error::{Error, Result};
pub use models::{make_model, ModelParams, QuantileModel, Transform};
pub use sample::{Sample, SampleSource};
