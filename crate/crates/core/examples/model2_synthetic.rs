//! Simulates household data with known site coefficients, fits the
//! household-level model and compares the treatment coefficients with truth.
//!
//! ```text
//! cargo run --release --example model2_synthetic -- [seed]
//! ```

use hbayes::diagnostics::summarize;
use hbayes::mathcore::Matrix;
use hbayes::models::{generate_synthetic_households, Model2, Model2Priors, SyntheticTruth};
use hbayes::sampler::{run, SamplerConfig};

fn main() -> hbayes::Result<()> {
    let seed: u64 = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(7);
    let z = Matrix::from_rows(&[
        vec![1.0, 0.0, 7.98],
        vec![1.0, 1.0, 6.0],
        vec![1.0, 1.0, 4.75],
        vec![1.0, 1.0, 6.53],
        vec![1.0, 1.0, 3.75],
        vec![1.0, 1.0, 17.14],
    ])?;
    let rho: f64 = 0.3;
    let truth = SyntheticTruth {
        gamma: Matrix::from_rows(&[vec![0.5, 0.2, 0.02], vec![0.2, 0.1, 0.01]])?,
        theta: vec![0.4, 0.2],
        l_omega: Matrix::from_rows(&[vec![1.0, 0.0], vec![rho, (1.0 - rho * rho).sqrt()]])?,
        sigma_s: vec![1.0; 6],
        z,
        households_per_site: vec![500; 6],
        with_baseline: false,
    };
    let data = generate_synthetic_households(&truth, seed)?;
    let model = Model2::new(
        data.outcomes(),
        data.design.clone(),
        Model2Priors::default(),
    )?;

    let start = std::time::Instant::now();
    let fit = run(
        &model,
        &SamplerConfig {
            seed,
            ..SamplerConfig::default()
        },
    )?;
    let summary = summarize(&fit);
    println!(
        "fit took {:.2?}, {} divergences",
        start.elapsed(),
        fit.total_divergences()
    );

    println!(
        "{:<10} {:>8} {:>8} {:>8} {:>8}  covered",
        "param", "truth", "mean", "q2.5", "q97.5"
    );
    for s in 0..6 {
        let name = format!("beta[2,{}]", s + 1);
        let p = summary
            .get(&name)
            .expect("treatment coefficient is summarized");
        let t = data.beta[(1, s)];
        let covered = p.quantiles[0] <= t && t <= p.quantiles[4];
        println!(
            "{name:<10} {t:>8.3} {:>8.3} {:>8.3} {:>8.3}  {covered}",
            p.mean, p.quantiles[0], p.quantiles[4]
        );
    }
    println!("max R-hat {:.4}", summary.max_rhat());
    Ok(())
}
