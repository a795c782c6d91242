//! Site-summary partial pooling model in non-centered form.
//!
//! ```text
//! tau_hat_s ~ N(tau + sigma * eta_s, sigma_hat_s)
//! eta_s     ~ N(0, 1)
//! tau       ~ N(0, tau_sd)
//! sigma     ~ half-Cauchy(0, scale)
//! ```
//!
//! Unconstrained coordinates are `(tau, ln sigma, eta_1, .., eta_S)`. With
//! [`Heterogeneity::Known`] sigma is fixed and the layout is
//! `(tau, eta_1, .., eta_S)`.

use serde::{Deserialize, Serialize};

use super::{validate_sites, LogDensity, SiteSummary};
use crate::mathcore::density::{half_cauchy_lpdf_unchecked, normal_lpdf_unchecked};
use crate::mathcore::HALF_LN_TWO_PI;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Heterogeneity {
    HalfCauchy {
        scale: f64,
    },
    /// Between-site scale held fixed; the model is then jointly Gaussian.
    Known {
        sigma: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Model1Priors {
    pub tau_sd: f64,
    pub heterogeneity: Heterogeneity,
}

impl Default for Model1Priors {
    fn default() -> Self {
        Model1Priors {
            tau_sd: 5f64.sqrt(),
            heterogeneity: Heterogeneity::HalfCauchy { scale: 5.0 },
        }
    }
}

/// Constrained Model-1 parameters. Site effects are always derived.
#[derive(Debug, Clone, PartialEq)]
pub struct Model1Parameters {
    pub tau: f64,
    pub sigma: f64,
    pub eta: Vec<f64>,
}

impl Model1Parameters {
    pub fn site_effects(&self) -> Vec<f64> {
        self.eta.iter().map(|e| self.tau + self.sigma * e).collect()
    }
}

#[derive(Debug, Clone)]
pub struct Model1 {
    sites: Vec<SiteSummary>,
    priors: Model1Priors,
}

impl Model1 {
    pub fn new(sites: Vec<SiteSummary>, priors: Model1Priors) -> Result<Self> {
        validate_sites(&sites)?;
        if !(priors.tau_sd > 0.0) {
            return Err(Error::Validation(format!(
                "tau prior sd {} must be positive",
                priors.tau_sd
            )));
        }
        match priors.heterogeneity {
            Heterogeneity::HalfCauchy { scale } if !(scale > 0.0) => {
                return Err(Error::Validation(format!(
                    "sigma prior scale {scale} must be positive"
                )))
            }
            Heterogeneity::Known { sigma } if !(sigma > 0.0) => {
                return Err(Error::Validation(format!(
                    "known sigma {sigma} must be positive"
                )))
            }
            _ => {}
        }
        Ok(Model1 { sites, priors })
    }

    pub fn with_default_priors(sites: Vec<SiteSummary>) -> Result<Self> {
        Model1::new(sites, Model1Priors::default())
    }

    pub fn sites(&self) -> &[SiteSummary] {
        &self.sites
    }

    pub fn priors(&self) -> &Model1Priors {
        &self.priors
    }

    fn eta_offset(&self) -> usize {
        match self.priors.heterogeneity {
            Heterogeneity::HalfCauchy { .. } => 2,
            Heterogeneity::Known { .. } => 1,
        }
    }

    fn sigma_at(&self, z: &[f64]) -> f64 {
        match self.priors.heterogeneity {
            Heterogeneity::HalfCauchy { .. } => z[1].exp(),
            Heterogeneity::Known { sigma } => sigma,
        }
    }

    pub fn constrain(&self, z: &[f64]) -> Result<Model1Parameters> {
        if z.len() != self.dim() {
            return Err(Error::Shape {
                what: "Model 1 unconstrained vector",
                expected: self.dim(),
                found: z.len(),
            });
        }
        Ok(Model1Parameters {
            tau: z[0],
            sigma: self.sigma_at(z),
            eta: z[self.eta_offset()..].to_vec(),
        })
    }

    pub fn unconstrain(&self, params: &Model1Parameters) -> Result<Vec<f64>> {
        if params.eta.len() != self.sites.len() {
            return Err(Error::Shape {
                what: "Model 1 eta",
                expected: self.sites.len(),
                found: params.eta.len(),
            });
        }
        let mut z = vec![params.tau];
        if let Heterogeneity::HalfCauchy { .. } = self.priors.heterogeneity {
            if !(params.sigma > 0.0) {
                return Err(Error::domain(
                    "Model1::unconstrain",
                    "sigma must be positive",
                ));
            }
            z.push(params.sigma.ln());
        }
        z.extend_from_slice(&params.eta);
        Ok(z)
    }

    /// Checked log density and gradient.
    pub fn log_density_checked(&self, z: &[f64]) -> Result<(f64, Vec<f64>)> {
        self.evaluate(z)
    }
}

impl LogDensity for Model1 {
    fn dim(&self) -> usize {
        self.sites.len() + self.eta_offset()
    }

    fn log_density_gradient(&self, z: &[f64], grad: &mut [f64]) -> f64 {
        let tau = z[0];
        let sigma = self.sigma_at(z);
        let off = self.eta_offset();
        let eta = &z[off..];
        grad.iter_mut().for_each(|g| *g = 0.0);

        let tau_var = self.priors.tau_sd * self.priors.tau_sd;
        let mut lp = normal_lpdf_unchecked(tau, 0.0, self.priors.tau_sd);
        grad[0] = -tau / tau_var;

        let mut d_sigma = 0.0;
        for (s, (site, &e)) in self.sites.iter().zip(eta).enumerate() {
            let r = site.tau_hat - tau - sigma * e;
            let prec = 1.0 / (site.sigma_hat * site.sigma_hat);
            lp += normal_lpdf_unchecked(site.tau_hat, tau + sigma * e, site.sigma_hat);
            lp += -0.5 * e * e - HALF_LN_TWO_PI;
            grad[0] += r * prec;
            grad[off + s] = sigma * r * prec - e;
            d_sigma += r * e * prec;
        }

        if let Heterogeneity::HalfCauchy { scale } = self.priors.heterogeneity {
            lp += half_cauchy_lpdf_unchecked(sigma, scale) + z[1];
            d_sigma += -2.0 * sigma / (scale * scale + sigma * sigma);
            grad[1] = sigma * d_sigma + 1.0;
        }
        lp
    }

    fn parameter_names(&self) -> Vec<String> {
        let n = self.sites.len();
        let mut names = vec!["tau".to_string(), "sigma".to_string()];
        names.extend((1..=n).map(|s| format!("eta[{s}]")));
        names.extend((1..=n).map(|s| format!("tau_s[{s}]")));
        names
    }

    fn constrained_draw(&self, z: &[f64]) -> Vec<f64> {
        let tau = z[0];
        let sigma = self.sigma_at(z);
        let eta = &z[self.eta_offset()..];
        let mut out = Vec::with_capacity(2 + 2 * eta.len());
        out.push(tau);
        out.push(sigma);
        out.extend_from_slice(eta);
        out.extend(eta.iter().map(|e| tau + sigma * e));
        out
    }
}
