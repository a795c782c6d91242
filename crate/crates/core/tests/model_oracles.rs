mod common;

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use hbayes::diagnostics::{mcse_mean, summarize};
use hbayes::mathcore::Matrix;
use hbayes::models::{
    generate_synthetic_households, model2_beta, DesignMatrices, Heterogeneity, LogDensity, Model1,
    Model1Priors, Model2, Model2Priors, SiteSummary,
};
use hbayes::sampler::{run, run_metropolis, MetropolisConfig, SamplerConfig};

use common::{mean, six_sites};

fn random_model2(
    rng: &mut ChaCha8Rng,
    n: usize,
    i_dim: usize,
    j_dim: usize,
    s_dim: usize,
) -> Model2 {
    let mut x = Matrix::zeros(n, i_dim);
    let mut site = Vec::with_capacity(n);
    for r in 0..n {
        x[(r, 0)] = 1.0;
        for k in 1..i_dim {
            x[(r, k)] = rng.sample(StandardNormal);
        }
        site.push(if r < s_dim {
            r
        } else {
            rng.random_range(0..s_dim)
        });
    }
    let mut z = Matrix::zeros(s_dim, j_dim);
    for s in 0..s_dim {
        z[(s, 0)] = 1.0;
        for j in 1..j_dim {
            z[(s, j)] = rng.random_range(-2.0..2.0);
        }
    }
    let y = (0..n)
        .map(|_| rng.sample::<f64, _>(StandardNormal) * 2.0)
        .collect();
    Model2::new(
        y,
        DesignMatrices::new(x, z, site).unwrap(),
        Model2Priors::default(),
    )
    .unwrap()
}

#[test]
fn model2_likelihood_matches_naive_loop() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for trial in 0..20 {
        let n = rng.random_range(1..=100);
        let i_dim = rng.random_range(1..=3);
        let j_dim = rng.random_range(1..=3);
        let s_dim = rng.random_range(1..=n.min(6));
        let model = random_model2(&mut rng, n, i_dim, j_dim, s_dim);
        let z: Vec<f64> = (0..model.dim())
            .map(|_| rng.random_range(-2.0..2.0))
            .collect();
        let params = model.constrain(&z).unwrap();
        let beta = params.beta(&model.design().z).unwrap();

        let design = model.design();
        let mut naive = 0.0;
        for r in 0..n {
            let s = design.site[r];
            let mut mu = 0.0;
            for k in 0..i_dim {
                mu += design.x[(r, k)] * beta[(k, s)];
            }
            let sd = params.sigma_s[s];
            let resid = (model.outcomes()[r] - mu) / sd;
            naive += -0.5 * (2.0 * PI).ln() - sd.ln() - 0.5 * resid * resid;
        }
        let fast = model.log_likelihood(&beta, &params.sigma_s);
        assert!(
            (fast - naive).abs() <= 1e-10 * naive.abs().max(1.0),
            "trial {trial}: {fast} vs {naive}"
        );
    }
}

#[test]
fn residual_free_household_term() {
    // One household, X = (1, 0), beta_1 = 2 from gamma, u = 0, sigma = 1, y = 2.
    let x = Matrix::from_rows(&[vec![1.0, 0.0]]).unwrap();
    let z = Matrix::from_rows(&[vec![1.0]]).unwrap();
    let design = DesignMatrices::new(x, z, vec![0]).unwrap();
    let model = Model2::new(vec![2.0], design, Model2Priors::default()).unwrap();
    let beta = Matrix::from_rows(&[vec![2.0], vec![0.3]]).unwrap();
    let ll = model.log_likelihood(&beta, &[1.0]);
    assert!((ll - -0.9189385).abs() < 1e-7);
}

#[test]
fn beta_covariance_matches_theta_omega_theta() {
    let theta = [0.7, 1.8, 0.4];
    // Cholesky factor of correlations 0.6, 0.5 and 0.7; small correlations
    // would make a 2% relative tolerance finer than the Monte Carlo error.
    let l = Matrix::from_rows(&[
        vec![1.0, 0.0, 0.0],
        vec![0.6, 0.8, 0.0],
        vec![0.5, 0.5, 0.5f64.sqrt()],
    ])
    .unwrap();
    let gamma = Matrix::from_rows(&[vec![1.0, 0.5], vec![-0.2, 0.1], vec![0.0, 2.0]]).unwrap();
    let z = Matrix::from_rows(&[vec![1.0, 3.0]]).unwrap();
    let mean_beta = gamma.matmul(&z.transpose()).unwrap();
    let omega = l.matmul(&l.transpose()).unwrap();

    let n = 200_000;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut second = [[0.0; 3]; 3];
    for _ in 0..n {
        let mut u = Matrix::zeros(3, 1);
        for k in 0..3 {
            u[(k, 0)] = rng.sample(StandardNormal);
        }
        let beta = model2_beta(&gamma, &z, &theta, &l, &u).unwrap();
        for a in 0..3 {
            for b in 0..3 {
                second[a][b] +=
                    (beta[(a, 0)] - mean_beta[(a, 0)]) * (beta[(b, 0)] - mean_beta[(b, 0)]);
            }
        }
    }
    for a in 0..3 {
        for b in 0..3 {
            let expected = theta[a] * omega[(a, b)] * theta[b];
            let got = second[a][b] / n as f64;
            assert!(
                (got - expected).abs() <= 0.02 * expected.abs(),
                "entry ({a},{b}): {got} vs {expected}"
            );
        }
    }
}

#[test]
fn densities_finite_on_random_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let m1 = Model1::with_default_priors(six_sites()).unwrap();
    let data = generate_synthetic_households(&common::synthetic_truth(30, true), 2).unwrap();
    let m2 = Model2::new(
        data.outcomes(),
        data.design.clone(),
        Model2Priors::default(),
    )
    .unwrap();
    let models: [&dyn LogDensity; 2] = [&m1, &m2];
    for model in models {
        for _ in 0..1000 {
            let z: Vec<f64> = (0..model.dim())
                .map(|_| rng.random_range(-4.0..4.0))
                .collect();
            let (lp, grad) = model.evaluate(&z).unwrap();
            assert!(lp.is_finite());
            assert!(grad.iter().all(|g| g.is_finite()));
        }
    }
}

#[test]
fn shrinkage_lies_between_estimate_and_grand_mean() {
    let sites = six_sites();
    let model = Model1::with_default_priors(sites.clone()).unwrap();
    let draws = run(&model, &SamplerConfig::default()).unwrap();
    let summary = summarize(&draws);
    let tau = summary.get("tau").unwrap().mean;
    for (s, site) in sites.iter().enumerate() {
        let name = format!("tau_s[{}]", s + 1);
        let m = summary.get(&name).unwrap().mean;
        // Slack for Monte Carlo error when the estimate sits near the grand mean.
        let slack = 3.0 * mcse_mean(&draws.sequences_by_name(&name).unwrap());
        let (lo, hi) = if site.tau_hat < tau {
            (site.tau_hat, tau)
        } else {
            (tau, site.tau_hat)
        };
        assert!(
            lo - slack <= m && m <= hi + slack,
            "{}: {m} not in [{lo}, {hi}] ± {slack}",
            site.site_name
        );
        // Estimates far from the grand mean move strictly toward it.
        if (site.tau_hat - tau).abs() > 0.1 {
            assert!((m - tau).abs() < (site.tau_hat - tau).abs());
        }
    }
}

#[test]
fn permuting_sites_permutes_posteriors() {
    let sites = six_sites();
    let order = [3usize, 0, 5, 1, 4, 2];
    let permuted: Vec<SiteSummary> = order.iter().map(|&i| sites[i].clone()).collect();
    let config = SamplerConfig::default();
    let a = run(&Model1::with_default_priors(sites).unwrap(), &config).unwrap();
    let b = run(&Model1::with_default_priors(permuted).unwrap(), &config).unwrap();
    for (new, &old) in order.iter().enumerate() {
        let xa = a.sequences_by_name(&format!("tau_s[{}]", old + 1)).unwrap();
        let xb = b.sequences_by_name(&format!("tau_s[{}]", new + 1)).unwrap();
        let se = mcse_mean(&xa).hypot(mcse_mean(&xb));
        let diff = mean(&xa.concat()) - mean(&xb.concat());
        assert!(
            diff.abs() <= 4.0 * se,
            "site {old}: difference {diff} vs se {se}"
        );
        let sd_ratio = common::sd(&xa.concat()) / common::sd(&xb.concat());
        assert!(
            (sd_ratio - 1.0).abs() < 0.1,
            "site {old}: sd ratio {sd_ratio}"
        );
    }
}

#[test]
fn gaussian_reduction_holds_under_metropolis() {
    // With sigma known the posterior of (tau, tau_1, tau_2) is Gaussian; the
    // closed form below follows from conditioning a joint normal.
    let sites = vec![
        SiteSummary::new("a", 0.4, 0.2),
        SiteSummary::new("b", -0.1, 0.3),
    ];
    let sigma = 0.5;
    let v = 5.0;
    let prior = nalgebra::Matrix3::new(v, v, v, v, v + sigma * sigma, v, v, v, v + sigma * sigma);
    let mut precision = prior.try_inverse().unwrap();
    let mut b = nalgebra::Vector3::zeros();
    for (i, s) in sites.iter().enumerate() {
        precision[(i + 1, i + 1)] += 1.0 / (s.sigma_hat * s.sigma_hat);
        b[i + 1] = s.tau_hat / (s.sigma_hat * s.sigma_hat);
    }
    let cov = precision.try_inverse().unwrap();
    let mu = cov * b;

    let priors = Model1Priors {
        tau_sd: v.sqrt(),
        heterogeneity: Heterogeneity::Known { sigma },
    };
    let model = Model1::new(sites, priors).unwrap();
    let draws = run_metropolis(&model, &MetropolisConfig::default()).unwrap();
    for (k, name) in ["tau", "tau_s[1]", "tau_s[2]"].iter().enumerate() {
        let chains = draws.sequences_by_name(name).unwrap();
        let m = mean(&chains.concat());
        assert!(
            (m - mu[k]).abs() <= 3.0 * mcse_mean(&chains),
            "{name}: {m} vs {}",
            mu[k]
        );
        let s = common::sd(&chains.concat());
        assert!(
            (s / cov[(k, k)].sqrt() - 1.0).abs() < 0.05,
            "{name}: sd {s}"
        );
    }
}

#[test]
fn single_site_fit_is_prior_dominated() {
    let model = Model1::with_default_priors(vec![SiteSummary::new("only", 0.3, 0.1)]).unwrap();
    let draws = run(&model, &SamplerConfig::default()).unwrap();
    let summary = summarize(&draws);
    let sigma = summary.get("sigma").unwrap();
    // One estimate carries almost no information about between-site spread.
    assert!(
        sigma.quantiles[4] > 5.0,
        "97.5% quantile {}",
        sigma.quantiles[4]
    );
    let tau_s = summary.get("tau_s[1]").unwrap();
    assert!((tau_s.mean - 0.3).abs() < 0.05);
}

#[test]
fn synthetic_baseline_design_has_three_columns() {
    let data = generate_synthetic_households(&common::synthetic_truth(20, true), 9).unwrap();
    assert_eq!(data.design.individual_predictors(), 3);
    assert_eq!(data.design.site_predictors(), 3);
    assert_eq!(data.design.sites(), 6);
    assert!(data.households.iter().all(|h| h.baseline.is_some()));
    let prior = Model1Priors::default();
    assert!(matches!(
        prior.heterogeneity,
        Heterogeneity::HalfCauchy { .. }
    ));
}
