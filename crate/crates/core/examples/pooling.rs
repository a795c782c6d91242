//! Pooling factors: how far each site's estimate is pulled toward the
//! common mean, given the posterior mean of the between-site sd.

use hbayes::diagnostics::{pooling_report, PoolingReport};
use hbayes::models::{Model1, SiteSummary};
use hbayes::sampler::{run, SamplerConfig};

fn main() -> hbayes::Result<()> {
    let sites = vec![
        SiteSummary::new("Ethiopia", 0.54, 0.07),
        SiteSummary::new("Ghana", 0.22, 0.05),
        SiteSummary::new("Honduras", 0.02, 0.04),
        SiteSummary::new("India", 0.69, 0.09),
        SiteSummary::new("Pakistan", 0.32, 0.07),
        SiteSummary::new("Peru", 0.08, 0.05),
    ];
    let model = Model1::with_default_priors(sites.clone())?;
    let fit = run(&model, &SamplerConfig::default())?;
    let report = pooling_report(&fit, &sites)?;

    println!("sigma_tilde = {:.3}", report.sigma_tilde);
    for s in &report.sites {
        println!(
            "{:<10} sigma_hat {:.2}  omega {:.3}",
            s.site_name, s.sigma_hat, s.omega
        );
    }
    println!("omega_bar = {:.3}", report.omega_bar);

    // The same formula for a few hypothetical between-site sds.
    println!("\nomega_bar as a function of sigma_tilde:");
    for sigma_tilde in [0.01, 0.03, 0.1, 0.34, 1.0] {
        let r = PoolingReport::from_sigma_tilde(sigma_tilde, &sites)?;
        println!("  {sigma_tilde:>5.2} -> {:.3}", r.omega_bar);
    }
    Ok(())
}
