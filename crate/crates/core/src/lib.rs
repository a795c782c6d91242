//! Hierarchical Bayesian partial pooling across sites.
//!
//! Two multilevel models are provided: a site-summary model that pools
//! per-site treatment-effect estimates (`models::model1`), and a
//! household-level varying-coefficients regression with an LKJ prior on the
//! coefficient correlation (`models::model2`). Both are sampled with a
//! Hamiltonian Monte Carlo sampler using jittered fixed-length trajectories,
//! dual-averaging step-size adaptation and a windowed diagonal metric.
//!
//! The `diagnostics` module covers split-R̂, effective sample size, posterior
//! summaries, pooling factors and the rescaling sensitivity harness; `cli`
//! wires everything to CSV files.

// `!(x > 0.0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod diagnostics;
pub mod error;
pub mod mathcore;
pub mod models;
pub mod sampler;

pub use error::{Error, Result};
pub use models::{LogDensity, SiteSummary};
pub use sampler::{ChainDraws, SamplerConfig};
