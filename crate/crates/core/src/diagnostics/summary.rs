use serde::Serialize;

use super::convergence::{effective_sample_size_chains, split_rhat};
use crate::sampler::ChainDraws;

pub const QUANTILE_LEVELS: [f64; 5] = [0.025, 0.25, 0.5, 0.75, 0.975];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParameterSummary {
    pub name: String,
    pub mean: f64,
    pub sd: f64,
    /// At [`QUANTILE_LEVELS`].
    pub quantiles: [f64; 5],
    pub rhat: f64,
    pub ess: f64,
    pub degenerate: bool,
}

impl ParameterSummary {
    /// Summary of per-chain sequences of one parameter.
    pub fn from_chains(name: impl Into<String>, chains: &[Vec<f64>]) -> Self {
        let pooled = chains.concat();
        assert!(!pooled.is_empty(), "cannot summarize an empty sample");
        let n = pooled.len() as f64;
        let mean = pooled.iter().sum::<f64>() / n;
        let sd = if pooled.len() > 1 {
            (pooled.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        let mut sorted = pooled;
        sorted.sort_by(f64::total_cmp);
        let quantiles = QUANTILE_LEVELS.map(|p| quantile_sorted(&sorted, p));
        let min_len = chains.iter().map(Vec::len).min().unwrap_or(0);
        let (rhat, rhat_degenerate) = if min_len >= 2 {
            let r = split_rhat(chains);
            (r.value, r.degenerate)
        } else {
            (f64::NAN, true)
        };
        let (ess, ess_degenerate) = if min_len >= 4 {
            let e = effective_sample_size_chains(chains);
            (e.value, e.degenerate)
        } else {
            (f64::NAN, true)
        };
        ParameterSummary {
            name: name.into(),
            mean,
            sd,
            quantiles,
            rhat,
            ess,
            degenerate: rhat_degenerate || ess_degenerate,
        }
    }

    pub fn median(&self) -> f64 {
        self.quantiles[2]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PosteriorSummary {
    pub parameters: Vec<ParameterSummary>,
}

impl PosteriorSummary {
    pub fn get(&self, name: &str) -> Option<&ParameterSummary> {
        self.parameters.iter().find(|p| p.name == name)
    }

    pub fn max_rhat(&self) -> f64 {
        self.parameters
            .iter()
            .filter(|p| !p.degenerate)
            .map(|p| p.rhat)
            .fold(1.0, f64::max)
    }
}

/// Every named parameter of a fit, in model order.
pub fn summarize(draws: &ChainDraws) -> PosteriorSummary {
    PosteriorSummary {
        parameters: draws
            .parameter_names
            .iter()
            .enumerate()
            .map(|(i, name)| ParameterSummary::from_chains(name.clone(), &draws.sequences(i)))
            .collect(),
    }
}

/// Linear interpolation between order statistics at position `(n−1)·p`.
pub fn quantile(draws: &[f64], p: f64) -> f64 {
    let mut sorted = draws.to_vec();
    sorted.sort_by(f64::total_cmp);
    quantile_sorted(&sorted, p)
}

pub(crate) fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}
