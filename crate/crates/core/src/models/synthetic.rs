//! Simulated household data with known coefficients.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{model2_beta, DesignMatrices, HouseholdRecord};
use crate::mathcore::Matrix;
use crate::{Error, Result};

/// Ground truth for [`generate_synthetic_households`]. `gamma` is I×J with
/// `I = 2` (intercept, treatment) or `I = 3` when `with_baseline` is set.
#[derive(Debug, Clone)]
pub struct SyntheticTruth {
    pub gamma: Matrix,
    pub theta: Vec<f64>,
    pub l_omega: Matrix,
    pub sigma_s: Vec<f64>,
    pub z: Matrix,
    pub households_per_site: Vec<usize>,
    pub with_baseline: bool,
}

#[derive(Debug, Clone)]
pub struct SyntheticData {
    pub households: Vec<HouseholdRecord>,
    pub design: DesignMatrices,
    /// Realized site coefficients, I×S.
    pub beta: Matrix,
    pub u: Matrix,
}

impl SyntheticData {
    pub fn outcomes(&self) -> Vec<f64> {
        self.households.iter().map(|h| h.y).collect()
    }
}

/// Draws `u ~ N(0, 1)`, forms `beta`, then per household a Bernoulli(½)
/// treatment, an optional standard-normal baseline and `y ~ N(X·beta, sigma)`.
pub fn generate_synthetic_households(truth: &SyntheticTruth, seed: u64) -> Result<SyntheticData> {
    let i_dim = if truth.with_baseline { 3 } else { 2 };
    let s_dim = truth.z.rows();
    if truth.gamma.rows() != i_dim {
        return Err(Error::Shape {
            what: "synthetic gamma rows",
            expected: i_dim,
            found: truth.gamma.rows(),
        });
    }
    if truth.sigma_s.len() != s_dim || truth.households_per_site.len() != s_dim {
        return Err(Error::Shape {
            what: "synthetic per-site settings",
            expected: s_dim,
            found: truth.sigma_s.len().min(truth.households_per_site.len()),
        });
    }
    if truth.households_per_site.contains(&0) {
        return Err(Error::Validation(
            "every site needs at least one household".into(),
        ));
    }
    if truth.sigma_s.iter().any(|&s| !(s > 0.0)) {
        return Err(Error::Validation("residual scales must be positive".into()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut u = Matrix::zeros(i_dim, s_dim);
    for k in 0..i_dim {
        for s in 0..s_dim {
            u[(k, s)] = rng.sample(StandardNormal);
        }
    }
    let beta = model2_beta(&truth.gamma, &truth.z, &truth.theta, &truth.l_omega, &u)?;

    let mut households = Vec::with_capacity(truth.households_per_site.iter().sum());
    for (s, &n) in truth.households_per_site.iter().enumerate() {
        for _ in 0..n {
            let treatment: u8 = rng.random_bool(0.5).into();
            let baseline = truth
                .with_baseline
                .then(|| rng.sample::<f64, _>(StandardNormal));
            let mut mu = beta[(0, s)] + f64::from(treatment) * beta[(1, s)];
            if let Some(b) = baseline {
                mu += b * beta[(2, s)];
            }
            let noise: f64 = rng.sample(StandardNormal);
            households.push(HouseholdRecord {
                site_index: s + 1,
                y: mu + truth.sigma_s[s] * noise,
                treatment,
                baseline,
            });
        }
    }
    let design =
        DesignMatrices::from_households(&households, truth.z.clone(), truth.with_baseline)?;
    Ok(SyntheticData {
        households,
        design,
        beta,
        u,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn truth(n: usize, sigma: f64, with_baseline: bool) -> SyntheticTruth {
        let i = if with_baseline { 3 } else { 2 };
        let z = Matrix::from_rows(&[
            vec![1.0, 0.0, 7.98],
            vec![1.0, 1.0, 6.0],
            vec![1.0, 1.0, 4.75],
        ])
        .unwrap();
        let gamma_rows: Vec<Vec<f64>> = (0..i)
            .map(|k| vec![0.5 / (k + 1) as f64, 0.1, 0.02])
            .collect();
        let rho: f64 = 0.3;
        let mut l = Matrix::identity(i);
        l[(1, 0)] = rho;
        l[(1, 1)] = (1.0 - rho * rho).sqrt();
        SyntheticTruth {
            gamma: Matrix::from_rows(&gamma_rows).unwrap(),
            theta: vec![0.3; i],
            l_omega: l,
            sigma_s: vec![sigma; 3],
            z,
            households_per_site: vec![n; 3],
            with_baseline,
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let t = truth(30, 1.0, true);
        let a = generate_synthetic_households(&t, 11).unwrap();
        let b = generate_synthetic_households(&t, 11).unwrap();
        assert_eq!(a.households, b.households);
        let c = generate_synthetic_households(&t, 12).unwrap();
        assert_ne!(a.households, c.households);
    }

    #[test]
    fn vanishing_noise_reproduces_linear_predictor() {
        let t = truth(20, 1e-8, true);
        let d = generate_synthetic_households(&t, 5).unwrap();
        for (n, h) in d.households.iter().enumerate() {
            let s = d.design.site[n];
            let mu: f64 = (0..3).map(|k| d.design.x[(n, k)] * d.beta[(k, s)]).sum();
            assert!((h.y - mu).abs() < 1e-6);
        }
    }

    /// Per-site ordinary least squares via the normal equations.
    fn ols_site(d: &SyntheticData, site: usize) -> (Vec<f64>, Vec<f64>) {
        let rows: Vec<usize> = (0..d.households.len())
            .filter(|&n| d.design.site[n] == site)
            .collect();
        let p = d.design.x.cols();
        let mut xtx = vec![vec![0.0; p]; p];
        let mut xty = vec![0.0; p];
        for &n in &rows {
            let x = d.design.x.row(n);
            for a in 0..p {
                xty[a] += x[a] * d.households[n].y;
                for b in 0..p {
                    xtx[a][b] += x[a] * x[b];
                }
            }
        }
        // Gauss-Jordan inverse
        let mut aug: Vec<Vec<f64>> = (0..p)
            .map(|a| {
                let mut r = xtx[a].clone();
                r.extend((0..p).map(|b| if a == b { 1.0 } else { 0.0 }));
                r
            })
            .collect();
        for c in 0..p {
            let piv = aug[c][c];
            for v in aug[c].iter_mut() {
                *v /= piv;
            }
            for r in 0..p {
                if r != c {
                    let f = aug[r][c];
                    for k in 0..2 * p {
                        aug[r][k] -= f * aug[c][k];
                    }
                }
            }
        }
        let inv: Vec<Vec<f64>> = aug.iter().map(|r| r[p..].to_vec()).collect();
        let coef: Vec<f64> = (0..p)
            .map(|a| (0..p).map(|b| inv[a][b] * xty[b]).sum())
            .collect();
        let rss: f64 = rows
            .iter()
            .map(|&n| {
                let x = d.design.x.row(n);
                let fit: f64 = (0..p).map(|a| x[a] * coef[a]).sum();
                (d.households[n].y - fit).powi(2)
            })
            .sum();
        let s2 = rss / (rows.len() - p) as f64;
        let se = (0..p).map(|a| (s2 * inv[a][a]).sqrt()).collect();
        (coef, se)
    }

    #[test]
    fn ols_recovers_site_coefficients() {
        let t = truth(50_000, 1.0, true);
        let d = generate_synthetic_households(&t, 2024).unwrap();
        for s in 0..3 {
            let (coef, se) = ols_site(&d, s);
            for k in 0..3 {
                let z = (coef[k] - d.beta[(k, s)]) / se[k];
                assert!(z.abs() < 3.0, "site {s} coef {k}: z = {z}");
            }
        }
    }

    #[test]
    fn rejects_inconsistent_truth() {
        let mut t = truth(5, 1.0, false);
        t.households_per_site[1] = 0;
        assert!(generate_synthetic_households(&t, 1).is_err());
        let mut t = truth(5, 1.0, true);
        t.with_baseline = false;
        assert!(generate_synthetic_households(&t, 1).is_err());
    }
}
