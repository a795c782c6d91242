//! Convergence diagnostics, posterior summaries and pooling analysis.

mod convergence;
mod pooling;
mod sensitivity;
mod summary;

pub use convergence::{
    effective_sample_size, effective_sample_size_chains, mcse_mean, mcse_sd, split_rhat, Ess, Rhat,
};
pub use pooling::{pooling_factor, pooling_report, PoolingReport, SitePooling};
pub use sensitivity::{sensitivity_harness, Scenario, SensitivityRow, TauChange};
pub(crate) use summary::quantile_sorted;
pub use summary::{quantile, summarize, ParameterSummary, PosteriorSummary, QUANTILE_LEVELS};
