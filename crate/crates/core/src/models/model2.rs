//! Household-level varying-coefficients model.
//!
//! ```text
//! y_i        ~ N(X_i · beta[, site_i], sigma_site_i)
//! beta       = gamma · Zᵀ + diag(theta) · L_Omega · u
//! u          ~ N(0, 1) entrywise
//! L_Omega    ~ LKJ-Cholesky(eta)
//! theta_k    = theta_scale · tan(theta_unif_k),  theta_unif_k ~ U(0, π/2)
//! gamma      ~ N(0, gamma_sd) entrywise
//! sigma_s    ~ U(0, sigma_upper)
//! ```
//!
//! The `tan` of a uniform angle is the Cauchy quantile map restricted to the
//! positive half line, so `theta_k` is half-Cauchy(0, theta_scale) without a
//! heavy-tailed coordinate in the sampler.
//!
//! Unconstrained layout: `gamma` (I×J, row-major), `u` (I×S, row-major),
//! `theta_unif` (I, logit of `theta_unif / (π/2)`), the `I(I−1)/2`
//! canonical-partial-correlation coordinates of `L_Omega`, then `sigma_s`
//! (S, logit of `sigma_s / sigma_upper`).

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use super::LogDensity;
use crate::mathcore::density::{lkj_coefficient, normal_lpdf_unchecked};
use crate::mathcore::transform::{cholesky_corr_constrain, interval_log_jacobian, logistic};
use crate::mathcore::{Dual, Matrix, Real, HALF_LN_TWO_PI};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Model2Priors {
    pub gamma_sd: f64,
    pub theta_scale: f64,
    pub lkj_eta: f64,
    pub sigma_upper: f64,
}

impl Default for Model2Priors {
    fn default() -> Self {
        Model2Priors {
            gamma_sd: 5f64.sqrt(),
            theta_scale: 2.5,
            lkj_eta: 2.0,
            sigma_upper: 100_000.0,
        }
    }
}

/// One household. `site_index` is one-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HouseholdRecord {
    pub site_index: usize,
    pub y: f64,
    pub treatment: u8,
    pub baseline: Option<f64>,
}

/// Individual-level design `x` (N×I), site-level design `z` (S×J) and the
/// zero-based site of every row of `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrices {
    pub x: Matrix,
    pub z: Matrix,
    pub site: Vec<usize>,
}

impl DesignMatrices {
    pub fn new(x: Matrix, z: Matrix, site: Vec<usize>) -> Result<Self> {
        if site.len() != x.rows() {
            return Err(Error::Shape {
                what: "site assignment length",
                expected: x.rows(),
                found: site.len(),
            });
        }
        if x.cols() == 0 || z.cols() == 0 {
            return Err(Error::Validation(
                "design matrices need at least one column".into(),
            ));
        }
        if (0..x.rows()).any(|i| x[(i, 0)] != 1.0) {
            return Err(Error::Validation(
                "first column of X must be all ones".into(),
            ));
        }
        if (0..z.rows()).any(|s| z[(s, 0)] != 1.0) {
            return Err(Error::Validation(
                "first column of Z must be all ones".into(),
            ));
        }
        if let Some(i) = site.iter().position(|&s| s >= z.rows()) {
            return Err(Error::Data(format!(
                "household {} is assigned to site {} but only {} sites exist",
                i + 1,
                site[i] + 1,
                z.rows()
            )));
        }
        Ok(DesignMatrices { x, z, site })
    }

    /// Builds `X = (1, T)` or `X = (1, T, baseline)` from household records.
    pub fn from_households(
        households: &[HouseholdRecord],
        z: Matrix,
        with_baseline: bool,
    ) -> Result<Self> {
        let cols = if with_baseline { 3 } else { 2 };
        let mut x = Matrix::zeros(households.len(), cols);
        let mut site = Vec::with_capacity(households.len());
        for (i, h) in households.iter().enumerate() {
            if h.site_index == 0 || h.site_index > z.rows() {
                return Err(Error::Data(format!(
                    "household {} has site index {} outside 1..={}",
                    i + 1,
                    h.site_index,
                    z.rows()
                )));
            }
            if h.treatment > 1 {
                return Err(Error::Validation(format!(
                    "household {} has treatment {}; expected 0 or 1",
                    i + 1,
                    h.treatment
                )));
            }
            x[(i, 0)] = 1.0;
            x[(i, 1)] = f64::from(h.treatment);
            if with_baseline {
                x[(i, 2)] = h.baseline.ok_or_else(|| {
                    Error::Validation(format!("household {} has no baseline value", i + 1))
                })?;
            }
            site.push(h.site_index - 1);
        }
        DesignMatrices::new(x, z, site)
    }

    pub fn individual_predictors(&self) -> usize {
        self.x.cols()
    }

    pub fn site_predictors(&self) -> usize {
        self.z.cols()
    }

    pub fn sites(&self) -> usize {
        self.z.rows()
    }
}

/// `beta = gamma · Zᵀ + diag(theta) · L_Omega · u`, an I×S matrix.
pub fn model2_beta(
    gamma: &Matrix,
    z: &Matrix,
    theta: &[f64],
    l_omega: &Matrix,
    u: &Matrix,
) -> Result<Matrix> {
    let i_dim = gamma.rows();
    let check = |what, expected: usize, found: usize| {
        if expected != found {
            Err(Error::Shape {
                what,
                expected,
                found,
            })
        } else {
            Ok(())
        }
    };
    check("theta length", i_dim, theta.len())?;
    check("L_Omega rows", i_dim, l_omega.rows())?;
    check("L_Omega cols", i_dim, l_omega.cols())?;
    check("u rows", i_dim, u.rows())?;
    check("u cols", z.rows(), u.cols())?;
    let mut beta = gamma.matmul(&z.transpose())?;
    let w = l_omega.matmul(u)?;
    for k in 0..i_dim {
        for s in 0..u.cols() {
            beta[(k, s)] += theta[k] * w[(k, s)];
        }
    }
    Ok(beta)
}

/// Constrained Model-2 parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Model2Parameters {
    pub gamma: Matrix,
    pub u: Matrix,
    pub theta_unif: Vec<f64>,
    pub l_omega: Matrix,
    pub sigma_s: Vec<f64>,
    pub theta_scale: f64,
}

impl Model2Parameters {
    pub fn theta(&self) -> Vec<f64> {
        self.theta_unif
            .iter()
            .map(|t| self.theta_scale * t.tan())
            .collect()
    }

    pub fn beta(&self, z: &Matrix) -> Result<Matrix> {
        model2_beta(&self.gamma, z, &self.theta(), &self.l_omega, &self.u)
    }

    /// Correlation matrix `L_Omega · L_Omegaᵀ`.
    pub fn omega(&self) -> Matrix {
        self.l_omega
            .matmul(&self.l_omega.transpose())
            .expect("square factor")
    }

    /// Covariance `diag(theta) · Omega · diag(theta)`.
    pub fn sigma_matrix(&self) -> Matrix {
        let theta = self.theta();
        let mut cov = self.omega();
        for a in 0..cov.rows() {
            for b in 0..cov.cols() {
                cov[(a, b)] *= theta[a] * theta[b];
            }
        }
        cov
    }
}

#[derive(Debug, Clone, Copy)]
struct Layout {
    i: usize,
    j: usize,
    s: usize,
}

impl Layout {
    fn gamma(&self) -> usize {
        0
    }
    fn u(&self) -> usize {
        self.i * self.j
    }
    fn theta(&self) -> usize {
        self.u() + self.i * self.s
    }
    fn chol(&self) -> usize {
        self.theta() + self.i
    }
    fn chol_len(&self) -> usize {
        self.i * (self.i - 1) / 2
    }
    fn sigma(&self) -> usize {
        self.chol() + self.chol_len()
    }
    fn dim(&self) -> usize {
        self.sigma() + self.s
    }
}

#[derive(Debug, Clone)]
pub struct Model2 {
    y: Vec<f64>,
    design: DesignMatrices,
    priors: Model2Priors,
    layout: Layout,
}

impl Model2 {
    pub fn new(y: Vec<f64>, design: DesignMatrices, priors: Model2Priors) -> Result<Self> {
        if y.is_empty() {
            return Err(Error::Validation(
                "Model 2 needs at least one household".into(),
            ));
        }
        if y.len() != design.x.rows() {
            return Err(Error::Shape {
                what: "outcome length",
                expected: design.x.rows(),
                found: y.len(),
            });
        }
        if let Some(i) = y.iter().position(|v| !v.is_finite()) {
            return Err(Error::Data(format!(
                "household {} has a non-finite outcome",
                i + 1
            )));
        }
        if !(priors.gamma_sd > 0.0 && priors.theta_scale > 0.0 && priors.sigma_upper > 0.0) {
            return Err(Error::Validation(
                "Model 2 prior scales must be positive".into(),
            ));
        }
        if !(priors.lkj_eta >= 1.0) {
            return Err(Error::Validation(format!(
                "LKJ shape {} must be >= 1",
                priors.lkj_eta
            )));
        }
        let layout = Layout {
            i: design.individual_predictors(),
            j: design.site_predictors(),
            s: design.sites(),
        };
        Ok(Model2 {
            y,
            design,
            priors,
            layout,
        })
    }

    pub fn from_households(
        households: &[HouseholdRecord],
        z: Matrix,
        with_baseline: bool,
        priors: Model2Priors,
    ) -> Result<Self> {
        let design = DesignMatrices::from_households(households, z, with_baseline)?;
        Model2::new(households.iter().map(|h| h.y).collect(), design, priors)
    }

    pub fn design(&self) -> &DesignMatrices {
        &self.design
    }

    pub fn outcomes(&self) -> &[f64] {
        &self.y
    }

    pub fn priors(&self) -> &Model2Priors {
        &self.priors
    }

    pub fn constrain(&self, z: &[f64]) -> Result<Model2Parameters> {
        let lay = self.layout;
        if z.len() != lay.dim() {
            return Err(Error::Shape {
                what: "Model 2 unconstrained vector",
                expected: lay.dim(),
                found: z.len(),
            });
        }
        let gamma = Matrix::from_row_major(lay.i, lay.j, z[lay.gamma()..lay.u()].to_vec())?;
        let u = Matrix::from_row_major(lay.i, lay.s, z[lay.u()..lay.theta()].to_vec())?;
        let theta_unif = z[lay.theta()..lay.chol()]
            .iter()
            .map(|&r| FRAC_PI_2 * logistic(r))
            .collect();
        let (l, _) = cholesky_corr_constrain(&z[lay.chol()..lay.sigma()], lay.i, 0.0);
        let sigma_s = z[lay.sigma()..]
            .iter()
            .map(|&r| self.priors.sigma_upper * logistic(r))
            .collect();
        Ok(Model2Parameters {
            gamma,
            u,
            theta_unif,
            l_omega: Matrix::from_row_major(lay.i, lay.i, l)?,
            sigma_s,
            theta_scale: self.priors.theta_scale,
        })
    }

    /// Log-likelihood term alone at constrained `beta` and `sigma_s`.
    pub fn log_likelihood(&self, beta: &Matrix, sigma_s: &[f64]) -> f64 {
        let x = &self.design.x;
        (0..self.y.len())
            .map(|n| {
                let s = self.design.site[n];
                let mu: f64 = (0..x.cols()).map(|k| x[(n, k)] * beta[(k, s)]).sum();
                normal_lpdf_unchecked(self.y[n], mu, sigma_s[s])
            })
            .sum()
    }

    pub fn log_density_checked(&self, z: &[f64]) -> Result<(f64, Vec<f64>)> {
        self.evaluate(z)
    }
}

impl LogDensity for Model2 {
    fn dim(&self) -> usize {
        self.layout.dim()
    }

    fn log_density_gradient(&self, z: &[f64], grad: &mut [f64]) -> f64 {
        let lay = self.layout;
        let (ni, nj, ns) = (lay.i, lay.j, lay.s);
        let pr = &self.priors;
        let zmat = &self.design.z;
        let x = &self.design.x;
        grad.iter_mut().for_each(|g| *g = 0.0);

        let gamma = &z[lay.gamma()..lay.u()];
        let u = &z[lay.u()..lay.theta()];
        let theta_raw = &z[lay.theta()..lay.chol()];
        let chol_raw = &z[lay.chol()..lay.sigma()];
        let sigma_raw = &z[lay.sigma()..];

        // L_Omega with derivatives with respect to its own coordinates.
        let nc = lay.chol_len();
        let seeds: Vec<Dual> = chol_raw
            .iter()
            .enumerate()
            .map(|(c, &v)| Dual::variable(v, c, nc))
            .collect();
        let (l_dual, log_jac_l) = cholesky_corr_constrain(&seeds, ni, Dual::constant(0.0, nc));
        let mut chol_terms = log_jac_l;
        for k in 1..ni {
            chol_terms = chol_terms + l_dual[k * ni + k].ln() * lkj_coefficient(ni, k, pr.lkj_eta);
        }
        let l: Vec<f64> = l_dual.iter().map(|d| d.value).collect();

        let mut theta = vec![0.0; ni];
        let mut dtheta_draw = vec![0.0; ni];
        let mut lp = chol_terms.value;
        for k in 0..ni {
            let s = logistic(theta_raw[k]);
            let angle = FRAC_PI_2 * s;
            let t = angle.tan();
            theta[k] = pr.theta_scale * t;
            // d theta / d raw
            dtheta_draw[k] = pr.theta_scale * (1.0 + t * t) * FRAC_PI_2 * s * (1.0 - s);
            lp += interval_log_jacobian(theta_raw[k], FRAC_PI_2) - FRAC_PI_2.ln();
            grad[lay.theta() + k] = 1.0 - 2.0 * s;
        }

        let mut sigma = vec![0.0; ns];
        for s in 0..ns {
            let p = logistic(sigma_raw[s]);
            sigma[s] = pr.sigma_upper * p;
            lp += interval_log_jacobian(sigma_raw[s], pr.sigma_upper) - pr.sigma_upper.ln();
        }

        // w = L u, beta = gamma Zᵀ + diag(theta) w
        let mut w = vec![0.0; ni * ns];
        for k in 0..ni {
            for m in 0..=k {
                let lkm = l[k * ni + m];
                for s in 0..ns {
                    w[k * ns + s] += lkm * u[m * ns + s];
                }
            }
        }
        let mut beta = vec![0.0; ni * ns];
        for k in 0..ni {
            for s in 0..ns {
                let mut b = theta[k] * w[k * ns + s];
                for jj in 0..nj {
                    b += gamma[k * nj + jj] * zmat[(s, jj)];
                }
                beta[k * ns + s] = b;
            }
        }

        // likelihood: accumulate per-site residual sums and score for beta
        let mut d_beta = vec![0.0; ni * ns];
        let mut sum_sq = vec![0.0; ns];
        let mut count = vec![0usize; ns];
        let xs = x.as_slice();
        for n in 0..self.y.len() {
            let s = self.design.site[n];
            let row = &xs[n * ni..(n + 1) * ni];
            let mut mu = 0.0;
            for k in 0..ni {
                mu += row[k] * beta[k * ns + s];
            }
            let r = self.y[n] - mu;
            sum_sq[s] += r * r;
            count[s] += 1;
            for k in 0..ni {
                d_beta[k * ns + s] += row[k] * r;
            }
        }
        for s in 0..ns {
            let var = sigma[s] * sigma[s];
            lp += -(count[s] as f64) * (sigma[s].ln() + HALF_LN_TWO_PI) - 0.5 * sum_sq[s] / var;
            for k in 0..ni {
                d_beta[k * ns + s] /= var;
            }
            let d_sigma = -(count[s] as f64) / sigma[s] + sum_sq[s] / (var * sigma[s]);
            let p = logistic(sigma_raw[s]);
            grad[lay.sigma() + s] = d_sigma * pr.sigma_upper * p * (1.0 - p) + 1.0 - 2.0 * p;
        }

        // priors on u and gamma
        let gamma_var = pr.gamma_sd * pr.gamma_sd;
        for (idx, &g) in gamma.iter().enumerate() {
            lp += normal_lpdf_unchecked(g, 0.0, pr.gamma_sd);
            grad[lay.gamma() + idx] = -g / gamma_var;
        }
        for (idx, &v) in u.iter().enumerate() {
            lp += -0.5 * v * v - HALF_LN_TWO_PI;
            grad[lay.u() + idx] = -v;
        }

        // chain rule through beta
        for k in 0..ni {
            for jj in 0..nj {
                let mut acc = 0.0;
                for s in 0..ns {
                    acc += d_beta[k * ns + s] * zmat[(s, jj)];
                }
                grad[lay.gamma() + k * nj + jj] += acc;
            }
            let mut acc = 0.0;
            for s in 0..ns {
                acc += d_beta[k * ns + s] * w[k * ns + s];
            }
            grad[lay.theta() + k] += acc * dtheta_draw[k];
        }
        // d_w = diag(theta) d_beta; du = Lᵀ d_w; dL = d_w uᵀ (lower triangle)
        let mut d_l = vec![0.0; ni * ni];
        for k in 0..ni {
            for m in 0..=k {
                let lkm = l[k * ni + m];
                let mut acc = 0.0;
                for s in 0..ns {
                    let dw = theta[k] * d_beta[k * ns + s];
                    grad[lay.u() + m * ns + s] += lkm * dw;
                    acc += dw * u[m * ns + s];
                }
                d_l[k * ni + m] = acc;
            }
        }
        for c in 0..nc {
            let mut acc = chol_terms.deriv[c];
            for (idx, d) in l_dual.iter().enumerate() {
                if let Some(dd) = d.deriv.get(c) {
                    acc += d_l[idx] * dd;
                }
            }
            grad[lay.chol() + c] = acc;
        }
        lp
    }

    fn parameter_names(&self) -> Vec<String> {
        let Layout { i, j, s } = self.layout;
        let mut names = Vec::new();
        for k in 1..=i {
            for jj in 1..=j {
                names.push(format!("gamma[{k},{jj}]"));
            }
        }
        for k in 1..=i {
            for ss in 1..=s {
                names.push(format!("beta[{k},{ss}]"));
            }
        }
        for k in 1..=i {
            names.push(format!("theta[{k}]"));
        }
        for a in 1..=i {
            for b in a + 1..=i {
                names.push(format!("Omega[{a},{b}]"));
            }
        }
        for ss in 1..=s {
            names.push(format!("sigma_s[{ss}]"));
        }
        names
    }

    fn constrained_draw(&self, z: &[f64]) -> Vec<f64> {
        let p = self.constrain(z).expect("draw has the model dimension");
        let beta = p.beta(&self.design.z).expect("consistent shapes");
        let omega = p.omega();
        let mut out = Vec::with_capacity(self.parameter_names().len());
        out.extend_from_slice(p.gamma.as_slice());
        out.extend_from_slice(beta.as_slice());
        out.extend(p.theta());
        let i = self.layout.i;
        for a in 0..i {
            for b in a + 1..i {
                out.push(omega[(a, b)]);
            }
        }
        out.extend_from_slice(&p.sigma_s);
        out
    }
}
