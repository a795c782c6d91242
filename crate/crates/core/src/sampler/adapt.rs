//! Warmup: dual-averaging step size and windowed diagonal metric.
//!
//! The schedule follows the usual three phases: an initial fast buffer
//! (step size only), a sequence of doubling slow windows that each end with a
//! metric update, and a terminal fast buffer.
//!
//! Step-size averaging is not restarted at metric updates. Its iterates are
//! instead rescaled by [`stability_ratio`], so the terminal buffer refines a
//! converged average rather than starting over from a 50-iteration history.

use rand::Rng;

use super::hmc::{hmc_step, leapfrog, PhaseState, TrajectoryLength, TransitionStats};
use super::SamplerConfig;
use crate::models::LogDensity;
use crate::{Error, Result};

/// Nesterov dual averaging on `ln ε`.
#[derive(Debug, Clone)]
pub struct DualAveraging {
    target: f64,
    mu: f64,
    log_eps: f64,
    log_eps_bar: f64,
    h_bar: f64,
    count: usize,
    gamma: f64,
    t0: f64,
    kappa: f64,
}

impl DualAveraging {
    pub fn new(target: f64, eps: f64) -> Self {
        DualAveraging {
            target,
            mu: (10.0 * eps).ln(),
            log_eps: eps.ln(),
            log_eps_bar: 0.0,
            h_bar: 0.0,
            count: 0,
            gamma: 0.15,
            t0: 10.0,
            kappa: 0.75,
        }
    }

    /// Multiplies every step-size iterate by `factor` while keeping the
    /// accumulated acceptance history.
    ///
    /// The shrinkage point is moved to the averaged iterate, with the history
    /// adjusted so the current iterate is unchanged. Left at its initial
    /// value it would hold acceptance short of the target by roughly
    /// `gamma * (mu - ln eps) / sqrt(count)`, which matters for targets near one.
    pub fn rescale(&mut self, factor: f64) {
        let shift = factor.ln();
        self.log_eps += shift;
        if self.count == 0 {
            self.mu += shift;
            return;
        }
        self.log_eps_bar += shift;
        self.mu = self.log_eps_bar;
        let m = self.count as f64;
        self.h_bar = (self.mu - self.log_eps) * self.gamma / m.sqrt();
    }

    pub fn update(&mut self, accept_prob: f64) {
        self.count += 1;
        let m = self.count as f64;
        let w = 1.0 / (m + self.t0);
        self.h_bar = (1.0 - w) * self.h_bar + w * (self.target - accept_prob);
        self.log_eps = self.mu - m.sqrt() / self.gamma * self.h_bar;
        let decay = m.powf(-self.kappa);
        self.log_eps_bar = decay * self.log_eps + (1.0 - decay) * self.log_eps_bar;
    }

    pub fn current(&self) -> f64 {
        self.log_eps.exp()
    }

    /// Averaged iterate; falls back to the current value before any update.
    pub fn final_step_size(&self) -> f64 {
        if self.count == 0 {
            self.current()
        } else {
            self.log_eps_bar.exp()
        }
    }
}

/// Welford running variance per coordinate.
#[derive(Debug, Clone)]
pub struct RunningVariance {
    mean: Vec<f64>,
    m2: Vec<f64>,
    count: usize,
}

impl RunningVariance {
    pub fn new(dim: usize) -> Self {
        RunningVariance {
            mean: vec![0.0; dim],
            m2: vec![0.0; dim],
            count: 0,
        }
    }

    pub fn push(&mut self, x: &[f64]) {
        self.count += 1;
        let n = self.count as f64;
        for ((m, m2), &v) in self.mean.iter_mut().zip(self.m2.iter_mut()).zip(x) {
            let d = v - *m;
            *m += d / n;
            *m2 += d * (v - *m);
        }
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// Sample variance shrunk toward `1e-3`, as in Stan's regularized
    /// diagonal estimator.
    pub fn regularized(&self) -> Vec<f64> {
        let n = self.count as f64;
        self.m2
            .iter()
            .map(|m2| {
                let var = m2 / (n - 1.0);
                (n / (n + 5.0)) * var + 1e-3 * (5.0 / (n + 5.0))
            })
            .collect()
    }

    pub fn reset(&mut self) {
        self.mean.iter_mut().for_each(|v| *v = 0.0);
        self.m2.iter_mut().for_each(|v| *v = 0.0);
        self.count = 0;
    }
}

/// Iteration indices (exclusive ends) at which a slow window closes and the
/// metric is updated.
pub fn window_ends(warmup: usize) -> Vec<usize> {
    let (init, term, base) = if warmup < 150 {
        let init = (0.15 * warmup as f64) as usize;
        let term = (0.1 * warmup as f64) as usize;
        (init, term, warmup - init - term)
    } else {
        (75, 50, 25)
    };
    let slow_end = warmup - term;
    let mut ends = Vec::new();
    let mut start = init;
    let mut size = base;
    while start < slow_end {
        let mut end = start + size;
        // absorb a trailing window that would be shorter than its successor
        if end + 2 * size > slow_end {
            end = slow_end;
        }
        ends.push(end);
        start = end;
        size *= 2;
    }
    ends
}

/// One-step heuristic: doubles or halves `eps` until the single-step
/// acceptance probability crosses 0.8.
pub fn initial_step_size<M, R>(
    state: &PhaseState,
    model: &M,
    inv_mass: &[f64],
    eps: f64,
    rng: &mut R,
) -> f64
where
    M: LogDensity + ?Sized,
    R: Rng + ?Sized,
{
    use rand_distr::StandardNormal;
    let mut probe = state.clone();
    for (p, m) in probe.p.iter_mut().zip(inv_mass) {
        let z: f64 = rng.sample(StandardNormal);
        *p = z / m.sqrt();
    }
    let e0 = probe.energy(inv_mass);
    let log_accept = |eps: f64| match leapfrog(&probe, model, eps, 1, inv_mass) {
        Ok(end) => {
            let v = e0 - end.energy(inv_mass);
            if v.is_nan() {
                f64::NEG_INFINITY
            } else {
                v
            }
        }
        Err(_) => f64::NEG_INFINITY,
    };
    let mut eps = eps;
    let threshold = 0.8f64.ln();
    let direction = if log_accept(eps) > threshold {
        1.0
    } else {
        -1.0
    };
    for _ in 0..100 {
        let next = if direction > 0.0 {
            eps * 2.0
        } else {
            eps * 0.5
        };
        let la = log_accept(next);
        let crossed = if direction > 0.0 {
            la <= threshold
        } else {
            la > threshold
        };
        eps = next;
        if crossed || !(1e-10..1e7).contains(&eps) {
            break;
        }
    }
    eps.clamp(1e-10, 1e7)
}

/// Result of warmup for one chain.
#[derive(Debug, Clone)]
pub struct Warmup {
    pub step_size: f64,
    /// Diagonal inverse mass (variance scale).
    pub metric: Vec<f64>,
    pub state: PhaseState,
    pub stats: Vec<TransitionStats>,
}

/// Runs `config.warmup` adaptive transitions from `state`.
pub fn adapt_warmup<M, R>(
    model: &M,
    config: &SamplerConfig,
    chain: usize,
    state: PhaseState,
    rng: &mut R,
) -> Result<Warmup>
where
    M: LogDensity + ?Sized,
    R: Rng + ?Sized,
{
    if config.warmup < 100 {
        return Err(Error::Validation(format!(
            "warmup must be at least 100 iterations, got {}",
            config.warmup
        )));
    }
    let dim = model.dim();
    let mut metric = vec![1.0; dim];
    let mut state = state;
    let eps = initial_step_size(&state, model, &metric, 1.0, rng);
    let mut averaging = DualAveraging::new(config.target_accept, eps);
    let mut variance = RunningVariance::new(dim);
    let ends = window_ends(config.warmup);
    let first_window = if config.warmup < 150 {
        (0.15 * config.warmup as f64) as usize
    } else {
        75
    };
    let length = TrajectoryLength::Jittered {
        max: config.max_leapfrog,
    };
    let mut stats = Vec::with_capacity(config.warmup);
    let mut non_finite = 0usize;

    for it in 0..config.warmup {
        let step = jittered(averaging.current(), config.step_jitter, rng);
        let (next, st) = hmc_step(
            &state,
            model,
            step,
            length,
            &metric,
            config.divergence_threshold,
            rng,
        );
        if !st.energy_error.is_finite() {
            non_finite += 1;
        }
        averaging.update(st.accept_prob);
        state = next;
        stats.push(st);

        if config.adapt_metric && it >= first_window && ends.last().is_some_and(|&e| it < e) {
            variance.push(&state.q);
            if ends.contains(&(it + 1)) {
                let updated = variance.regularized();
                averaging.rescale(stability_ratio(&metric, &updated));
                metric = updated;
                variance.reset();
            }
        }
    }
    if non_finite * 2 > config.warmup {
        return Err(Error::Adaptation {
            chain,
            reason: format!(
                "{non_finite} of {} warmup trajectories were non-finite",
                config.warmup
            ),
        });
    }
    Ok(Warmup {
        step_size: averaging.final_step_size(),
        metric,
        state,
        stats,
    })
}

/// Step-size factor that keeps the expected energy error unchanged when the
/// inverse metric moves from `old` to `new`, taking `new` as the current
/// variance estimate. For Gaussian targets the leapfrog energy error grows
/// as `eps^4 * sum(s_i^-4)` with `s_i` the standard deviation in metric
/// units, which gives the fourth root of `mean((old / new)^2)`.
pub fn stability_ratio(old: &[f64], new: &[f64]) -> f64 {
    let n = old.len() as f64;
    let mean = old
        .iter()
        .zip(new)
        .map(|(o, n)| (o / n).powi(2))
        .sum::<f64>()
        / n;
    if mean.is_finite() && mean > 0.0 {
        mean.powf(0.25)
    } else {
        1.0
    }
}

pub(crate) fn jittered<R: Rng + ?Sized>(eps: f64, jitter: f64, rng: &mut R) -> f64 {
    if jitter > 0.0 {
        eps * (1.0 + jitter * rng.random_range(-1.0..1.0))
    } else {
        eps
    }
}
