//! Fits the site-summary model to the six-country treatment-effect estimates
//! and prints the posterior table.
//!
//! ```text
//! cargo run --release --example fit_model1 -- [sites.csv]
//! ```

use std::path::PathBuf;

use hbayes::cli::ingest_sites;
use hbayes::diagnostics::summarize;
use hbayes::models::Model1;
use hbayes::sampler::{run, SamplerConfig};

fn main() -> hbayes::Result<()> {
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| {
            PathBuf::from(concat!(
                env!("CARGO_MANIFEST_DIR"),
                "/examples/data/sites.csv"
            ))
        });
    let sites = ingest_sites(&path)?;
    let model = Model1::with_default_priors(sites)?;
    let fit = run(&model, &SamplerConfig::default())?;
    let summary = summarize(&fit);

    println!(
        "{:<10} {:>7} {:>7} {:>7} {:>7} {:>7} {:>7} {:>7} {:>7} {:>6}",
        "parameter", "mean", "sd", "2.5%", "25%", "50%", "75%", "97.5%", "R-hat", "ESS"
    );
    for p in summary
        .parameters
        .iter()
        .filter(|p| !p.name.starts_with("eta"))
    {
        let [a, b, c, d, e] = p.quantiles;
        println!(
            "{:<10} {:>7.3} {:>7.3} {a:>7.3} {b:>7.3} {c:>7.3} {d:>7.3} {e:>7.3} {:>7.4} {:>6.0}",
            p.name, p.mean, p.sd, p.rhat, p.ess
        );
    }
    println!(
        "divergent transitions after warmup: {}",
        fit.total_divergences()
    );
    Ok(())
}
