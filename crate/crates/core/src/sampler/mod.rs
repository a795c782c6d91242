//! Hamiltonian Monte Carlo with warmup adaptation, a random-walk Metropolis
//! baseline, and the multi-chain runner.

pub mod adapt;
pub mod hmc;
pub mod metropolis;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::models::LogDensity;
use crate::{Error, Result};

pub use adapt::{adapt_warmup, DualAveraging, Warmup};
pub use hmc::{hmc_step, leapfrog, PhaseState, TrajectoryLength, TransitionStats};
pub use metropolis::{rw_metropolis_step, MetropolisState};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub chains: usize,
    pub warmup: usize,
    /// Total iterations per chain, warmup included.
    pub iterations: usize,
    pub seed: u64,
    pub target_accept: f64,
    pub max_leapfrog: usize,
    pub divergence_threshold: f64,
    pub adapt_metric: bool,
    /// Step size is drawn uniformly from `ε·(1 ± jitter)` each iteration.
    pub step_jitter: f64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            chains: 4,
            warmup: 1000,
            iterations: 2000,
            seed: 1,
            target_accept: 0.99,
            max_leapfrog: 128,
            divergence_threshold: 1000.0,
            adapt_metric: true,
            step_jitter: 0.0,
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Validation(m));
        if self.chains == 0 {
            return fail("chains must be at least 1".into());
        }
        if self.warmup >= self.iterations {
            return fail(format!(
                "warmup ({}) must be smaller than total iterations ({})",
                self.warmup, self.iterations
            ));
        }
        if self.warmup < 100 {
            return fail(format!("warmup must be at least 100, got {}", self.warmup));
        }
        if !(self.target_accept > 0.0 && self.target_accept < 1.0) {
            return fail(format!(
                "target acceptance {} must lie in (0,1)",
                self.target_accept
            ));
        }
        if self.max_leapfrog == 0 {
            return fail("max leapfrog steps must be at least 1".into());
        }
        if !(self.divergence_threshold > 0.0) {
            return fail("divergence threshold must be positive".into());
        }
        if !(0.0..1.0).contains(&self.step_jitter) {
            return fail(format!(
                "step jitter {} must lie in [0,1)",
                self.step_jitter
            ));
        }
        Ok(())
    }

    pub fn draws_per_chain(&self) -> usize {
        self.iterations - self.warmup
    }
}

/// Post-warmup output of one chain.
#[derive(Debug, Clone, PartialEq)]
pub struct Chain {
    /// `draws[iteration][parameter]`, constrained and derived values.
    pub draws: Vec<Vec<f64>>,
    pub stats: Vec<TransitionStats>,
    pub step_size: f64,
    /// Diagonal inverse mass; proportional to the posterior variance of each
    /// unconstrained coordinate after adaptation.
    pub metric: Vec<f64>,
    pub warmup_divergences: usize,
}

impl Chain {
    pub fn divergences(&self) -> usize {
        self.stats.iter().filter(|s| s.divergent).count()
    }

    pub fn mean_accept_prob(&self) -> f64 {
        self.stats.iter().map(|s| s.accept_prob).sum::<f64>() / self.stats.len().max(1) as f64
    }

    pub fn acceptance_rate(&self) -> f64 {
        self.stats.iter().filter(|s| s.accepted).count() as f64 / self.stats.len().max(1) as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainDraws {
    pub parameter_names: Vec<String>,
    pub chains: Vec<Chain>,
}

impl ChainDraws {
    pub fn parameter_index(&self, name: &str) -> Option<usize> {
        self.parameter_names.iter().position(|n| n == name)
    }

    /// One sequence per chain for parameter `index`.
    pub fn sequences(&self, index: usize) -> Vec<Vec<f64>> {
        self.chains
            .iter()
            .map(|c| c.draws.iter().map(|d| d[index]).collect())
            .collect()
    }

    pub fn sequences_by_name(&self, name: &str) -> Option<Vec<Vec<f64>>> {
        self.parameter_index(name).map(|i| self.sequences(i))
    }

    /// All chains concatenated for parameter `index`.
    pub fn pooled(&self, index: usize) -> Vec<f64> {
        self.sequences(index).concat()
    }

    pub fn total_divergences(&self) -> usize {
        self.chains.iter().map(Chain::divergences).sum()
    }
}

fn chain_rng(seed: u64, chain: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chain as u64);
    rng
}

fn initial_position<M, R>(model: &M, rng: &mut R) -> Result<Vec<f64>>
where
    M: LogDensity + ?Sized,
    R: Rng + ?Sized,
{
    for _ in 0..100 {
        let q: Vec<f64> = (0..model.dim())
            .map(|_| rng.random_range(-2.0..=2.0))
            .collect();
        if PhaseState::at(model, q.clone()).is_finite() {
            return Ok(q);
        }
    }
    Err(Error::Initialization(
        "no finite log density found in 100 uniform draws on [-2, 2]".into(),
    ))
}

fn run_chain<M: LogDensity + ?Sized>(
    model: &M,
    config: &SamplerConfig,
    chain: usize,
) -> Result<Chain> {
    let mut rng = chain_rng(config.seed, chain);
    let q = initial_position(model, &mut rng)?;
    let warm = adapt_warmup(model, config, chain, PhaseState::at(model, q), &mut rng)?;
    let warmup_divergences = warm.stats.iter().filter(|s| s.divergent).count();
    let mut state = warm.state;
    let length = TrajectoryLength::Jittered {
        max: config.max_leapfrog,
    };
    let n = config.draws_per_chain();
    let mut draws = Vec::with_capacity(n);
    let mut stats = Vec::with_capacity(n);
    for _ in 0..n {
        let eps = adapt::jittered(warm.step_size, config.step_jitter, &mut rng);
        let (next, st) = hmc_step(
            &state,
            model,
            eps,
            length,
            &warm.metric,
            config.divergence_threshold,
            &mut rng,
        );
        state = next;
        draws.push(model.constrained_draw(&state.q));
        stats.push(st);
    }
    Ok(Chain {
        draws,
        stats,
        step_size: warm.step_size,
        metric: warm.metric,
        warmup_divergences,
    })
}

/// Runs `config.chains` independent HMC chains. Chain `c` draws from the
/// stream `(config.seed, c)`, so output does not depend on scheduling.
pub fn run<M: LogDensity + ?Sized>(model: &M, config: &SamplerConfig) -> Result<ChainDraws> {
    config.validate()?;
    let chains = (0..config.chains)
        .map(|c| {
            run_chain(model, config, c).map_err(|e| match e {
                Error::Initialization(m) => Error::Adaptation {
                    chain: c,
                    reason: m,
                },
                other => other,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ChainDraws {
        parameter_names: model.parameter_names(),
        chains,
    })
}

/// Settings for the random-walk Metropolis reference sampler.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetropolisConfig {
    pub chains: usize,
    pub warmup: usize,
    pub iterations: usize,
    /// Keep every `thin`-th post-warmup draw.
    pub thin: usize,
    pub seed: u64,
    pub initial_proposal_sd: f64,
    /// Acceptance rate targeted while tuning the proposal scale in warmup.
    pub target_accept: f64,
}

impl Default for MetropolisConfig {
    fn default() -> Self {
        MetropolisConfig {
            chains: 4,
            warmup: 20_000,
            iterations: 220_000,
            thin: 10,
            seed: 1,
            initial_proposal_sd: 0.1,
            target_accept: 0.234,
        }
    }
}

/// Random-walk Metropolis chains; the proposal scale is tuned by a
/// Robbins–Monro recursion on its logarithm during warmup, then frozen.
pub fn run_metropolis<M: LogDensity + ?Sized>(
    model: &M,
    config: &MetropolisConfig,
) -> Result<ChainDraws> {
    if config.chains == 0 || config.thin == 0 || config.warmup >= config.iterations {
        return Err(Error::Validation("invalid Metropolis configuration".into()));
    }
    let mut chains = Vec::with_capacity(config.chains);
    for c in 0..config.chains {
        let mut rng = chain_rng(config.seed, c);
        let q = initial_position(model, &mut rng)?;
        let mut state = MetropolisState::at(model, q);
        let mut log_sd = config.initial_proposal_sd.ln();
        for it in 0..config.warmup {
            let (next, st) = rw_metropolis_step(&state, model, log_sd.exp(), &mut rng);
            state = next;
            log_sd += (st.accept_prob - config.target_accept) / ((it + 1) as f64).powf(0.6);
        }
        let sd = log_sd.exp();
        let kept = (config.iterations - config.warmup) / config.thin;
        let mut draws = Vec::with_capacity(kept);
        let mut stats = Vec::with_capacity(kept);
        for it in 0..kept * config.thin {
            let (next, st) = rw_metropolis_step(&state, model, sd, &mut rng);
            state = next;
            if (it + 1) % config.thin == 0 {
                draws.push(model.constrained_draw(&state.q));
                stats.push(st);
            }
        }
        chains.push(Chain {
            draws,
            stats,
            step_size: sd,
            metric: vec![1.0; model.dim()],
            warmup_divergences: 0,
        });
    }
    Ok(ChainDraws {
        parameter_names: model.parameter_names(),
        chains,
    })
}
