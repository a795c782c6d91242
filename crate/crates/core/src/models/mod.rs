//! The two hierarchical models, exposed to the sampler through
//! [`LogDensity`].

pub mod model1;
pub mod model2;
pub mod synthetic;

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use model1::{Heterogeneity, Model1, Model1Parameters, Model1Priors};
pub use model2::{
    model2_beta, DesignMatrices, HouseholdRecord, Model2, Model2Parameters, Model2Priors,
};
pub use synthetic::{generate_synthetic_households, SyntheticData, SyntheticTruth};

/// One site's treatment-effect estimate and its standard error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SiteSummary {
    pub site_name: String,
    pub tau_hat: f64,
    pub sigma_hat: f64,
}

impl SiteSummary {
    pub fn new(site_name: impl Into<String>, tau_hat: f64, sigma_hat: f64) -> Self {
        SiteSummary {
            site_name: site_name.into(),
            tau_hat,
            sigma_hat,
        }
    }
}

/// Checks positivity of standard errors, finiteness and uniqueness of names.
pub fn validate_sites(sites: &[SiteSummary]) -> Result<()> {
    if sites.is_empty() {
        return Err(Error::Validation("at least one site is required".into()));
    }
    let mut seen = HashSet::new();
    for s in sites {
        if !s.tau_hat.is_finite() {
            return Err(Error::Validation(format!(
                "site `{}` has a non-finite tau_hat",
                s.site_name
            )));
        }
        if !(s.sigma_hat > 0.0) || !s.sigma_hat.is_finite() {
            return Err(Error::Validation(format!(
                "site `{}` has non-positive sigma_hat {}",
                s.site_name, s.sigma_hat
            )));
        }
        if !seen.insert(s.site_name.as_str()) {
            return Err(Error::Validation(format!(
                "duplicate site `{}`",
                s.site_name
            )));
        }
    }
    Ok(())
}

/// A differentiable log density on unconstrained space, the contract between
/// a model and the samplers.
pub trait LogDensity {
    fn dim(&self) -> usize;

    /// Writes the gradient into `grad` and returns the log density. The value
    /// may be non-finite; callers decide how to treat that.
    fn log_density_gradient(&self, z: &[f64], grad: &mut [f64]) -> f64;

    fn log_density(&self, z: &[f64]) -> f64 {
        let mut grad = vec![0.0; self.dim()];
        self.log_density_gradient(z, &mut grad)
    }

    /// Names of the constrained and derived quantities produced by
    /// [`LogDensity::constrained_draw`].
    fn parameter_names(&self) -> Vec<String>;

    fn constrained_draw(&self, z: &[f64]) -> Vec<f64>;

    /// Checked evaluation: shape and finiteness are errors.
    fn evaluate(&self, z: &[f64]) -> Result<(f64, Vec<f64>)> {
        if z.len() != self.dim() {
            return Err(Error::Shape {
                what: "unconstrained parameter vector",
                expected: self.dim(),
                found: z.len(),
            });
        }
        if let Some(c) = z.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                coordinate: Some(c),
            });
        }
        let mut grad = vec![0.0; self.dim()];
        let lp = self.log_density_gradient(z, &mut grad);
        if !lp.is_finite() {
            return Err(Error::NonFinite { coordinate: None });
        }
        if let Some(c) = grad.iter().position(|g| !g.is_finite()) {
            return Err(Error::NonFinite {
                coordinate: Some(c),
            });
        }
        Ok((lp, grad))
    }
}

impl<T: LogDensity + ?Sized> LogDensity for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn log_density_gradient(&self, z: &[f64], grad: &mut [f64]) -> f64 {
        (**self).log_density_gradient(z, grad)
    }
    fn log_density(&self, z: &[f64]) -> f64 {
        (**self).log_density(z)
    }
    fn parameter_names(&self) -> Vec<String> {
        (**self).parameter_names()
    }
    fn constrained_draw(&self, z: &[f64]) -> Vec<f64> {
        (**self).constrained_draw(z)
    }
}
