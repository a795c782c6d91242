//! Random-walk Metropolis with an isotropic Gaussian proposal.

use rand::Rng;
use rand_distr::StandardNormal;

use super::hmc::TransitionStats;
use crate::models::LogDensity;

/// A position and its log density.
#[derive(Debug, Clone, PartialEq)]
pub struct MetropolisState {
    pub q: Vec<f64>,
    pub log_density: f64,
}

impl MetropolisState {
    pub fn at<M: LogDensity + ?Sized>(model: &M, q: Vec<f64>) -> Self {
        let log_density = model.log_density(&q);
        MetropolisState { q, log_density }
    }
}

/// Proposes `q + N(0, proposal_sd²·I)` and accepts with probability
/// `min(1, p(proposal)/p(current))`; the symmetric proposal cancels.
pub fn rw_metropolis_step<M, R>(
    current: &MetropolisState,
    model: &M,
    proposal_sd: f64,
    rng: &mut R,
) -> (MetropolisState, TransitionStats)
where
    M: LogDensity + ?Sized,
    R: Rng + ?Sized,
{
    let q: Vec<f64> = current
        .q
        .iter()
        .map(|x| x + proposal_sd * rng.sample::<f64, _>(StandardNormal))
        .collect();
    let log_density = model.log_density(&q);
    let log_ratio = log_density - current.log_density;
    let accept_prob = if log_ratio.is_nan() {
        0.0
    } else {
        log_ratio.exp().min(1.0)
    };
    let u: f64 = rng.random();
    let accepted = log_density.is_finite() && u < accept_prob;
    let stats = TransitionStats {
        accepted,
        divergent: false,
        energy_error: 0.0,
        accept_prob,
        steps: 1,
    };
    if accepted {
        (MetropolisState { q, log_density }, stats)
    } else {
        (current.clone(), stats)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    struct StdNormal;
    impl LogDensity for StdNormal {
        fn dim(&self) -> usize {
            1
        }
        fn log_density_gradient(&self, z: &[f64], grad: &mut [f64]) -> f64 {
            grad[0] = -z[0];
            -0.5 * z[0] * z[0]
        }
        fn parameter_names(&self) -> Vec<String> {
            vec!["x".into()]
        }
        fn constrained_draw(&self, z: &[f64]) -> Vec<f64> {
            z.to_vec()
        }
    }

    #[test]
    fn uphill_moves_always_accepted() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let start = MetropolisState::at(&StdNormal, vec![6.0]);
        let mut uphill = 0;
        for _ in 0..200 {
            let (next, st) = rw_metropolis_step(&start, &StdNormal, 0.5, &mut rng);
            if st.accept_prob == 1.0 {
                uphill += 1;
                assert!(st.accepted);
                assert!(next.log_density >= start.log_density);
            }
        }
        assert!(uphill > 50);
    }

    #[test]
    fn tiny_proposals_are_nearly_always_accepted() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut s = MetropolisState::at(&StdNormal, vec![0.3]);
        let mut acc = 0;
        for _ in 0..1000 {
            let (n, st) = rw_metropolis_step(&s, &StdNormal, 1e-6, &mut rng);
            acc += usize::from(st.accepted);
            assert!((n.q[0] - 0.3).abs() < 1e-3);
            s = n;
        }
        assert!(acc >= 995);
    }

    #[test]
    fn stationary_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut s = MetropolisState::at(&StdNormal, vec![0.0]);
        let n = 200_000;
        let mut draws = Vec::with_capacity(n);
        for _ in 0..n {
            let (next, _) = rw_metropolis_step(&s, &StdNormal, 2.4, &mut rng);
            s = next;
            draws.push(s.q[0]);
        }
        let ess = crate::diagnostics::effective_sample_size(&draws).value;
        let mean = draws.iter().sum::<f64>() / n as f64;
        let sd = (draws.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
        assert!(mean.abs() < 3.0 * sd / ess.sqrt(), "mean {mean}, ess {ess}");
    }

    #[test]
    fn detailed_balance_on_binned_flows() {
        // symmetric flow counts between bins: N(a -> b) ≈ N(b -> a)
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let mut s = MetropolisState::at(&StdNormal, vec![0.0]);
        let bins = 8;
        let bin = |x: f64| (((x + 2.0) / 0.5).floor().clamp(0.0, (bins - 1) as f64)) as usize;
        let mut flow = vec![vec![0f64; bins]; bins];
        for _ in 0..400_000 {
            let from = bin(s.q[0]);
            let (next, _) = rw_metropolis_step(&s, &StdNormal, 1.0, &mut rng);
            flow[from][bin(next.q[0])] += 1.0;
            s = next;
        }
        for a in 0..bins {
            for b in a + 1..bins {
                let (f, r) = (flow[a][b], flow[b][a]);
                if f + r < 200.0 {
                    continue;
                }
                // difference of two near-Poisson counts; allow 4 sd
                assert!((f - r).abs() < 4.0 * (f + r).sqrt(), "{a}->{b}: {f} vs {r}");
            }
        }
    }
}
