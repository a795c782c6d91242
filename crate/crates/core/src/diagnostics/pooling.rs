use serde::Serialize;

use crate::models::SiteSummary;
use crate::sampler::ChainDraws;
use crate::{Error, Result};

/// Share of a site's estimate explained by cross-site information:
/// `σ̂² / (σ̃² + σ̂²)`.
pub fn pooling_factor(sigma_hat: f64, sigma_tilde: f64) -> Result<f64> {
    if !(sigma_hat > 0.0) || !(sigma_tilde > 0.0) {
        return Err(Error::domain(
            "pooling_factor",
            format!("arguments must be positive, got ({sigma_hat}, {sigma_tilde})"),
        ));
    }
    let v = sigma_hat * sigma_hat;
    Ok(v / (sigma_tilde * sigma_tilde + v))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SitePooling {
    pub site_name: String,
    pub sigma_hat: f64,
    pub omega: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PoolingReport {
    /// Posterior mean of the between-site scale.
    pub sigma_tilde: f64,
    pub sites: Vec<SitePooling>,
    /// Arithmetic mean of the per-site factors.
    pub omega_bar: f64,
}

impl PoolingReport {
    pub fn from_sigma_tilde(sigma_tilde: f64, data: &[SiteSummary]) -> Result<Self> {
        let sites = data
            .iter()
            .map(|s| {
                Ok(SitePooling {
                    site_name: s.site_name.clone(),
                    sigma_hat: s.sigma_hat,
                    omega: pooling_factor(s.sigma_hat, sigma_tilde)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let omega_bar = sites.iter().map(|s| s.omega).sum::<f64>() / sites.len().max(1) as f64;
        Ok(PoolingReport {
            sigma_tilde,
            sites,
            omega_bar,
        })
    }
}

/// Plug-in pooling factors at the posterior mean of `sigma`.
pub fn pooling_report(fit: &ChainDraws, data: &[SiteSummary]) -> Result<PoolingReport> {
    let idx = fit
        .parameter_index("sigma")
        .ok_or_else(|| Error::Data("fit has no `sigma` draws".into()))?;
    let pooled = fit.pooled(idx);
    if pooled.is_empty() {
        return Err(Error::Data("fit has no draws".into()));
    }
    let sigma_tilde = pooled.iter().sum::<f64>() / pooled.len() as f64;
    PoolingReport::from_sigma_tilde(sigma_tilde, data)
}
