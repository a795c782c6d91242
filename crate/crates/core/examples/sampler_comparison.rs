//! Cross-checks HMC against random-walk Metropolis on the site-summary
//! model, with split R-hat, effective sample size and Monte Carlo error.

use hbayes::diagnostics::{effective_sample_size_chains, mcse_mean, split_rhat};
use hbayes::models::{Model1, SiteSummary};
use hbayes::sampler::{run, run_metropolis, MetropolisConfig, SamplerConfig};

fn main() -> hbayes::Result<()> {
    let sites = vec![
        SiteSummary::new("Ethiopia", 0.54, 0.07),
        SiteSummary::new("Ghana", 0.22, 0.05),
        SiteSummary::new("Honduras", 0.02, 0.04),
        SiteSummary::new("India", 0.69, 0.09),
        SiteSummary::new("Pakistan", 0.32, 0.07),
        SiteSummary::new("Peru", 0.08, 0.05),
    ];
    let model = Model1::with_default_priors(sites)?;
    let hmc = run(&model, &SamplerConfig::default())?;
    let rwm = run_metropolis(&model, &MetropolisConfig::default())?;

    println!(
        "{:<10} {:>8} {:>8} {:>7} {:>8} {:>8} {:>7} {:>6}",
        "parameter", "hmc", "rwm", "z", "ess hmc", "ess rwm", "R-hat", "ok"
    );
    for name in &hmc.parameter_names {
        let a = hmc.sequences_by_name(name).expect("parameter exists");
        let b = rwm.sequences_by_name(name).expect("parameter exists");
        let mean = |c: &[Vec<f64>]| c.concat().iter().sum::<f64>() / c.concat().len() as f64;
        let se = mcse_mean(&a).hypot(mcse_mean(&b));
        let z = (mean(&a) - mean(&b)) / se;
        println!(
            "{name:<10} {:>8.4} {:>8.4} {z:>7.2} {:>8.0} {:>8.0} {:>7.4} {:>6}",
            mean(&a),
            mean(&b),
            effective_sample_size_chains(&a).value,
            effective_sample_size_chains(&b).value,
            split_rhat(&a).value,
            z.abs() <= 3.0
        );
    }
    Ok(())
}
