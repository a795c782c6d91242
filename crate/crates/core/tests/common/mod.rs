#![allow(dead_code)]

use std::fmt::Write as _;
use std::path::Path;

use hbayes::mathcore::Matrix;
use hbayes::models::{HouseholdRecord, SiteSummary, SyntheticTruth};

/// Site-level estimates and standard errors of the six-country study.
pub fn six_sites() -> Vec<SiteSummary> {
    [
        ("Ethiopia", 0.54, 0.07),
        ("Ghana", 0.22, 0.05),
        ("Honduras", 0.02, 0.04),
        ("India", 0.69, 0.09),
        ("Pakistan", 0.32, 0.07),
        ("Peru", 0.08, 0.05),
    ]
    .into_iter()
    .map(|(n, t, s)| SiteSummary::new(n, t, s))
    .collect()
}

pub fn sites_csv() -> &'static Path {
    Path::new(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/examples/data/sites.csv"
    ))
}

pub fn site_predictors_csv() -> &'static Path {
    Path::new(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/examples/data/site_predictors.csv"
    ))
}

/// Intercept, health-component indicator and asset-transfer value per site.
pub fn site_predictors() -> Matrix {
    let health = [0.0, 1.0, 1.0, 1.0, 1.0, 1.0];
    let transfer = [7.98, 6.0, 4.75, 6.53, 3.75, 17.14];
    let rows: Vec<Vec<f64>> = (0..6).map(|s| vec![1.0, health[s], transfer[s]]).collect();
    Matrix::from_rows(&rows).unwrap()
}

pub fn synthetic_truth(households_per_site: usize, with_baseline: bool) -> SyntheticTruth {
    let rho: f64 = 0.3;
    let mut gamma = vec![vec![0.5, 0.2, 0.02], vec![0.2, 0.1, 0.01]];
    let mut theta = vec![0.4, 0.2];
    let mut l = vec![vec![1.0, 0.0], vec![rho, (1.0 - rho * rho).sqrt()]];
    if with_baseline {
        gamma.push(vec![0.3, 0.0, 0.0]);
        theta.push(0.1);
        for row in &mut l {
            row.push(0.0);
        }
        l.push(vec![0.0, 0.0, 1.0]);
    }
    SyntheticTruth {
        gamma: Matrix::from_rows(&gamma).unwrap(),
        theta,
        l_omega: Matrix::from_rows(&l).unwrap(),
        sigma_s: vec![1.0; 6],
        z: site_predictors(),
        households_per_site: vec![households_per_site; 6],
        with_baseline,
    }
}

pub fn households_csv_text(households: &[HouseholdRecord], with_baseline: bool) -> String {
    let mut s = String::from(if with_baseline {
        "site_index,y,treatment,y_baseline\n"
    } else {
        "site_index,y,treatment\n"
    });
    for h in households {
        let _ = write!(s, "{},{},{}", h.site_index, h.y, h.treatment);
        if with_baseline {
            let _ = write!(
                s,
                ",{}",
                h.baseline.map_or(String::new(), |b| b.to_string())
            );
        }
        s.push('\n');
    }
    s
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

pub fn sd(xs: &[f64]) -> f64 {
    let m = mean(xs);
    (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}
