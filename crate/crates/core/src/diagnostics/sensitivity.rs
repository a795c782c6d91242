//! Refits of the site-summary model under rescaled or equalized inputs.

use std::fmt;
use std::str::FromStr;

use super::pooling::{pooling_report, PoolingReport};
use crate::models::{Model1, Model1Priors, SiteSummary};
use crate::sampler::{run, SamplerConfig};
use crate::{Error, Result};

/// How the effect estimates are altered.
#[derive(Debug, Clone, PartialEq)]
pub enum TauChange {
    Scale(f64),
    /// Every estimate replaced by this site's estimate.
    Equalize(String),
}

/// One input perturbation. Standard errors are always rescaled by
/// `sigma_scale`.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub tau: TauChange,
    pub sigma_scale: f64,
}

impl Scenario {
    pub fn original() -> Self {
        Scenario {
            tau: TauChange::Scale(1.0),
            sigma_scale: 1.0,
        }
    }

    /// The six rows of the standard rescaling study.
    pub fn default_set(equalize_site: &str) -> Vec<Scenario> {
        let tau = |c| Scenario {
            tau: TauChange::Scale(c),
            sigma_scale: 1.0,
        };
        let sigma = |c| Scenario {
            tau: TauChange::Scale(1.0),
            sigma_scale: c,
        };
        vec![
            Scenario::original(),
            tau(10.0),
            tau(0.1),
            sigma(10.0),
            sigma(0.1),
            Scenario {
                tau: TauChange::Equalize(equalize_site.to_string()),
                sigma_scale: 1.0,
            },
        ]
    }

    /// Applies the scenario to a copy of `base`.
    pub fn apply(&self, base: &[SiteSummary]) -> Result<Vec<SiteSummary>> {
        let tau_of = match &self.tau {
            TauChange::Scale(c) => {
                let c = *c;
                Box::new(move |s: &SiteSummary| s.tau_hat * c) as Box<dyn Fn(&SiteSummary) -> f64>
            }
            TauChange::Equalize(name) => {
                let v = base
                    .iter()
                    .find(|s| &s.site_name == name)
                    .ok_or_else(|| {
                        Error::Usage(format!("unknown site `{name}` in equalize scenario"))
                    })?
                    .tau_hat;
                Box::new(move |_: &SiteSummary| v)
            }
        };
        Ok(base
            .iter()
            .map(|s| {
                SiteSummary::new(
                    s.site_name.clone(),
                    tau_of(s),
                    s.sigma_hat * self.sigma_scale,
                )
            })
            .collect())
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.tau {
            TauChange::Scale(c) => write!(f, "tau*{c}")?,
            TauChange::Equalize(site) => write!(f, "equalize={site}")?,
        }
        write!(f, " sigma*{}", self.sigma_scale)
    }
}

fn parse_factor(token: &str, rest: &str) -> Result<f64> {
    let (divide, num) = match rest.as_bytes().first() {
        Some(b'*') => (false, &rest[1..]),
        Some(b'/') => (true, &rest[1..]),
        _ => {
            return Err(Error::Usage(format!(
                "scenario token `{token}` needs `*C` or `/C`"
            )))
        }
    };
    let c: f64 = num
        .parse()
        .map_err(|_| Error::Usage(format!("bad factor in scenario token `{token}`")))?;
    if !(c.is_finite() && c > 0.0) {
        return Err(Error::Usage(format!(
            "factor in `{token}` must be positive"
        )));
    }
    Ok(if divide { 1.0 / c } else { c })
}

impl FromStr for Scenario {
    type Err = Error;

    /// Whitespace- or `+`-separated tokens from `tau*C`, `tau/C`,
    /// `sigma*C`, `sigma/C`, `equalize=SITE` and `original`.
    fn from_str(s: &str) -> Result<Self> {
        let mut scenario = Scenario::original();
        let mut tau_set = false;
        let mut sigma_set = false;
        let tokens: Vec<&str> = s
            .split(|c: char| c.is_whitespace() || c == '+')
            .filter(|t| !t.is_empty())
            .collect();
        if tokens.is_empty() {
            return Err(Error::Usage("empty scenario".into()));
        }
        for token in tokens {
            if token == "original" {
                continue;
            }
            if let Some(rest) = token.strip_prefix("tau") {
                if tau_set {
                    return Err(Error::Usage(format!("scenario `{s}` alters tau twice")));
                }
                scenario.tau = TauChange::Scale(parse_factor(token, rest)?);
                tau_set = true;
            } else if let Some(rest) = token.strip_prefix("sigma") {
                if sigma_set {
                    return Err(Error::Usage(format!("scenario `{s}` alters sigma twice")));
                }
                scenario.sigma_scale = parse_factor(token, rest)?;
                sigma_set = true;
            } else if let Some(site) = token.strip_prefix("equalize=") {
                if tau_set || site.is_empty() {
                    return Err(Error::Usage(format!("invalid equalize token in `{s}`")));
                }
                scenario.tau = TauChange::Equalize(site.to_string());
                tau_set = true;
            } else {
                return Err(Error::Usage(format!("unknown scenario token `{token}`")));
            }
        }
        Ok(scenario)
    }
}

#[derive(Debug)]
pub struct SensitivityRow {
    pub scenario: Scenario,
    pub outcome: Result<PoolingReport>,
}

impl SensitivityRow {
    pub fn sigma_tilde(&self) -> Option<f64> {
        self.outcome.as_ref().ok().map(|r| r.sigma_tilde)
    }

    pub fn omega_bar(&self) -> Option<f64> {
        self.outcome.as_ref().ok().map(|r| r.omega_bar)
    }
}

/// Refits the site-summary model for each scenario. A failing row records its
/// error; the remaining rows are still produced.
pub fn sensitivity_harness(
    base: &[SiteSummary],
    scenarios: &[Scenario],
    config: &SamplerConfig,
    priors: Model1Priors,
) -> Vec<SensitivityRow> {
    scenarios
        .iter()
        .map(|scenario| {
            let outcome = scenario.apply(base).and_then(|data| {
                let model = Model1::new(data.clone(), priors)?;
                let fit = run(&model, config)?;
                pooling_report(&fit, &data)
            });
            SensitivityRow {
                scenario: scenario.clone(),
                outcome,
            }
        })
        .collect()
}
