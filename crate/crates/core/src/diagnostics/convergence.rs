//! Split-R̂ and autocorrelation-based effective sample size.

/// Potential scale reduction with a flag for zero within-chain variance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rhat {
    pub value: f64,
    pub degenerate: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ess {
    pub value: f64,
    pub degenerate: bool,
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

fn sample_var(x: &[f64]) -> f64 {
    let m = mean(x);
    x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (x.len() - 1) as f64
}

/// Split-chain R̂: every chain is cut into two halves (a middle draw of an
/// odd-length chain is dropped) and
/// `R̂ = sqrt((W + B/n) / W)` with `W` the mean half-chain variance and `B/n`
/// the variance of half-chain means.
///
/// Panics if any chain has fewer than 2 draws.
pub fn split_rhat(chains: &[Vec<f64>]) -> Rhat {
    let n = chains.iter().map(Vec::len).min().unwrap_or(0);
    assert!(n >= 2, "split_rhat needs at least 2 draws per chain");
    let half = n / 2;
    let halves: Vec<&[f64]> = chains
        .iter()
        .flat_map(|c| {
            let c = &c[..n];
            [&c[..half], &c[n - half..]]
        })
        .collect();
    let halves_usable = halves.iter().all(|h| h.len() >= 2);
    if !halves_usable {
        // two draws per chain: halves of length one carry no variance
        let whole: Vec<&[f64]> = chains.iter().map(|c| &c[..n]).collect();
        return variance_ratio(&whole);
    }
    variance_ratio(&halves)
}

fn variance_ratio(groups: &[&[f64]]) -> Rhat {
    let means: Vec<f64> = groups.iter().map(|g| mean(g)).collect();
    let w = groups.iter().map(|g| sample_var(g)).sum::<f64>() / groups.len() as f64;
    let b_over_n = if groups.len() > 1 {
        sample_var(&means)
    } else {
        0.0
    };
    if w <= 0.0 {
        let value = if b_over_n > 0.0 { f64::INFINITY } else { 1.0 };
        return Rhat {
            value,
            degenerate: true,
        };
    }
    Rhat {
        value: ((w + b_over_n) / w).sqrt(),
        degenerate: false,
    }
}

/// Autocovariance at `lag` with denominator `n`.
fn autocov(x: &[f64], m: f64, lag: usize) -> f64 {
    let n = x.len();
    x[..n - lag]
        .iter()
        .zip(&x[lag..])
        .map(|(a, b)| (a - m) * (b - m))
        .sum::<f64>()
        / n as f64
}

/// Multi-chain ESS. Autocorrelations combine within-chain autocovariances
/// with the between-chain variance; the sum is truncated at the first
/// negative pair `ρ_{2k} + ρ_{2k+1}`. Clamped to `1.5 × total draws`.
pub fn effective_sample_size_chains(chains: &[Vec<f64>]) -> Ess {
    let m = chains.len();
    let n = chains.iter().map(Vec::len).min().unwrap_or(0);
    let total = (m * n) as f64;
    assert!(
        n >= 4,
        "effective sample size needs at least 4 draws per chain"
    );
    let chains: Vec<&[f64]> = chains.iter().map(|c| &c[..n]).collect();
    let means: Vec<f64> = chains.iter().map(|c| mean(c)).collect();
    let acov0: Vec<f64> = chains
        .iter()
        .zip(&means)
        .map(|(c, &mu)| autocov(c, mu, 0))
        .collect();
    let nf = n as f64;
    let w = acov0.iter().sum::<f64>() / m as f64 * nf / (nf - 1.0);
    let b_over_n = if m > 1 { sample_var(&means) } else { 0.0 };
    let var_plus = w * (nf - 1.0) / nf + b_over_n;
    if !(var_plus > 0.0) || w <= 0.0 {
        return Ess {
            value: total,
            degenerate: true,
        };
    }
    let rho = |lag: usize| -> f64 {
        let mean_acov = chains
            .iter()
            .zip(&means)
            .map(|(c, &mu)| autocov(c, mu, lag))
            .sum::<f64>()
            / m as f64;
        1.0 - (w - mean_acov) / var_plus
    };
    let mut tau = -1.0;
    let mut k = 0;
    while 2 * k + 1 < n {
        let pair = if k == 0 {
            1.0 + rho(1)
        } else {
            rho(2 * k) + rho(2 * k + 1)
        };
        if pair < 0.0 {
            break;
        }
        tau += 2.0 * pair;
        k += 1;
    }
    let ess = if tau > 0.0 { total / tau } else { total * 1.5 };
    Ess {
        value: ess.min(1.5 * total),
        degenerate: false,
    }
}

/// Single-sequence ESS.
pub fn effective_sample_size(draws: &[f64]) -> Ess {
    effective_sample_size_chains(&[draws.to_vec()])
}

/// Monte-Carlo standard error of the posterior mean.
pub fn mcse_mean(chains: &[Vec<f64>]) -> f64 {
    let pooled = chains.concat();
    let ess = effective_sample_size_chains(chains).value;
    (sample_var(&pooled) / ess).sqrt()
}

/// Monte-Carlo standard error of the posterior standard deviation, by the
/// delta method on the second central moment with its own ESS.
pub fn mcse_sd(chains: &[Vec<f64>]) -> f64 {
    let pooled = chains.concat();
    let mu = mean(&pooled);
    let sd = sample_var(&pooled).sqrt();
    let sq: Vec<Vec<f64>> = chains
        .iter()
        .map(|c| c.iter().map(|x| (x - mu).powi(2)).collect())
        .collect();
    let sq_pooled = sq.concat();
    let ess = effective_sample_size_chains(&sq).value;
    let var_of_sq = sample_var(&sq_pooled);
    (var_of_sq / ess).sqrt() / (2.0 * sd)
}
