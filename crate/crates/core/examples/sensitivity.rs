//! Refits the site-summary model with rescaled effects and standard errors
//! to see how the between-site sd and the pooling respond.
//!
//! ```text
//! cargo run --release --example sensitivity -- ["tau*2" "sigma/3" ...]
//! ```

use hbayes::diagnostics::{sensitivity_harness, Scenario};
use hbayes::models::{Model1Priors, SiteSummary};
use hbayes::sampler::SamplerConfig;

fn main() -> hbayes::Result<()> {
    let sites = vec![
        SiteSummary::new("Ethiopia", 0.54, 0.07),
        SiteSummary::new("Ghana", 0.22, 0.05),
        SiteSummary::new("Honduras", 0.02, 0.04),
        SiteSummary::new("India", 0.69, 0.09),
        SiteSummary::new("Pakistan", 0.32, 0.07),
        SiteSummary::new("Peru", 0.08, 0.05),
    ];
    let args: Vec<String> = std::env::args().skip(1).collect();
    let scenarios = if args.is_empty() {
        Scenario::default_set("Ethiopia")
    } else {
        args.iter()
            .map(|a| a.parse())
            .collect::<hbayes::Result<_>>()?
    };

    let rows = sensitivity_harness(
        &sites,
        &scenarios,
        &SamplerConfig::default(),
        Model1Priors::default(),
    );
    println!(
        "{:<28} {:>12} {:>10}",
        "scenario", "sigma_tilde", "omega_bar"
    );
    for row in rows {
        match &row.outcome {
            Ok(r) => println!(
                "{:<28} {:>12.4} {:>10.4}",
                row.scenario.to_string(),
                r.sigma_tilde,
                r.omega_bar
            ),
            Err(e) => println!("{:<28} failed: {e}", row.scenario.to_string()),
        }
    }
    Ok(())
}
