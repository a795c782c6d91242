//! Phase-space state, the leapfrog integrator and one HMC transition.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::models::LogDensity;

/// Position, momentum and the cached log density and gradient at the
/// position. Potential energy is `−log_density`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseState {
    pub q: Vec<f64>,
    pub p: Vec<f64>,
    pub log_density: f64,
    pub grad: Vec<f64>,
}

impl PhaseState {
    /// Evaluates the model at `q` with zero momentum.
    pub fn at<M: LogDensity + ?Sized>(model: &M, q: Vec<f64>) -> Self {
        let mut grad = vec![0.0; q.len()];
        let log_density = model.log_density_gradient(&q, &mut grad);
        let p = vec![0.0; q.len()];
        PhaseState {
            q,
            p,
            log_density,
            grad,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.log_density.is_finite() && self.grad.iter().all(|g| g.is_finite())
    }

    pub fn potential(&self) -> f64 {
        -self.log_density
    }

    /// `Σ p_d² · inv_mass_d / 2`.
    pub fn kinetic(&self, inv_mass: &[f64]) -> f64 {
        0.5 * self
            .p
            .iter()
            .zip(inv_mass)
            .map(|(p, m)| p * p * m)
            .sum::<f64>()
    }

    pub fn energy(&self, inv_mass: &[f64]) -> f64 {
        self.potential() + self.kinetic(inv_mass)
    }
}

/// The trajectory hit a non-finite log density or gradient.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NonFiniteTrajectory {
    pub step: usize,
}

/// `steps` leapfrog iterations of size `eps`. `inv_mass` is the diagonal of
/// the inverse mass matrix (the metric's variance scale).
pub fn leapfrog<M: LogDensity + ?Sized>(
    state: &PhaseState,
    model: &M,
    eps: f64,
    steps: usize,
    inv_mass: &[f64],
) -> Result<PhaseState, NonFiniteTrajectory> {
    let mut next = state.clone();
    for step in 0..steps {
        for (p, g) in next.p.iter_mut().zip(&next.grad) {
            *p += 0.5 * eps * g;
        }
        for ((q, p), m) in next.q.iter_mut().zip(&next.p).zip(inv_mass) {
            *q += eps * p * m;
        }
        next.log_density = model.log_density_gradient(&next.q, &mut next.grad);
        if !next.is_finite() {
            return Err(NonFiniteTrajectory { step });
        }
        for (p, g) in next.p.iter_mut().zip(&next.grad) {
            *p += 0.5 * eps * g;
        }
    }
    Ok(next)
}

/// Number of leapfrog steps per transition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrajectoryLength {
    /// Uniform on `1..=max`.
    Jittered {
        max: usize,
    },
    Fixed(usize),
}

impl TrajectoryLength {
    fn draw<R: Rng + ?Sized>(self, rng: &mut R) -> usize {
        match self {
            TrajectoryLength::Jittered { max } => rng.random_range(1..=max.max(1)),
            TrajectoryLength::Fixed(n) => n,
        }
    }
}

/// Per-iteration sampler statistics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionStats {
    pub accepted: bool,
    pub divergent: bool,
    /// `E_new − E_old`; zero for random-walk transitions.
    pub energy_error: f64,
    pub accept_prob: f64,
    pub steps: usize,
}

/// Momentum refresh, leapfrog integration and accept/reject. On rejection or
/// divergence the returned state is `current` (with the refreshed momentum).
pub fn hmc_step<M, R>(
    current: &PhaseState,
    model: &M,
    eps: f64,
    length: TrajectoryLength,
    inv_mass: &[f64],
    divergence_threshold: f64,
    rng: &mut R,
) -> (PhaseState, TransitionStats)
where
    M: LogDensity + ?Sized,
    R: Rng + ?Sized,
{
    let mut start = current.clone();
    for (p, m) in start.p.iter_mut().zip(inv_mass) {
        let z: f64 = rng.sample(StandardNormal);
        *p = z / m.sqrt();
    }
    let steps = length.draw(rng);
    let e_old = start.energy(inv_mass);

    let (proposal, energy_error) = match leapfrog(&start, model, eps, steps, inv_mass) {
        Ok(end) => {
            let de = end.energy(inv_mass) - e_old;
            (Some(end), if de.is_nan() { f64::INFINITY } else { de })
        }
        Err(_) => (None, f64::INFINITY),
    };
    let divergent = proposal.is_none() || energy_error > divergence_threshold;
    let accept_prob = if divergent {
        0.0
    } else {
        (-energy_error).exp().min(1.0)
    };
    let u: f64 = rng.random();
    match proposal {
        Some(end) if !divergent && u < accept_prob => (
            end,
            TransitionStats {
                accepted: true,
                divergent: false,
                energy_error,
                accept_prob,
                steps,
            },
        ),
        _ => (
            start,
            TransitionStats {
                accepted: false,
                divergent,
                energy_error,
                accept_prob,
                steps,
            },
        ),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Isotropic Gaussian with per-coordinate scales.
    pub(crate) struct Gaussian {
        pub scales: Vec<f64>,
    }

    impl LogDensity for Gaussian {
        fn dim(&self) -> usize {
            self.scales.len()
        }
        fn log_density_gradient(&self, z: &[f64], grad: &mut [f64]) -> f64 {
            let mut lp = 0.0;
            for ((g, x), s) in grad.iter_mut().zip(z).zip(&self.scales) {
                lp -= 0.5 * (x / s).powi(2);
                *g = -x / (s * s);
            }
            lp
        }
        fn parameter_names(&self) -> Vec<String> {
            (0..self.dim()).map(|i| format!("x[{i}]")).collect()
        }
        fn constrained_draw(&self, z: &[f64]) -> Vec<f64> {
            z.to_vec()
        }
    }

    struct Flat;
    impl LogDensity for Flat {
        fn dim(&self) -> usize {
            2
        }
        fn log_density_gradient(&self, _z: &[f64], grad: &mut [f64]) -> f64 {
            grad.iter_mut().for_each(|g| *g = 0.0);
            0.0
        }
        fn parameter_names(&self) -> Vec<String> {
            vec!["a".into(), "b".into()]
        }
        fn constrained_draw(&self, z: &[f64]) -> Vec<f64> {
            z.to_vec()
        }
    }

    /// log(1/|q|): a pole at the origin.
    struct Pole;
    impl LogDensity for Pole {
        fn dim(&self) -> usize {
            1
        }
        fn log_density_gradient(&self, z: &[f64], grad: &mut [f64]) -> f64 {
            grad[0] = -1.0 / z[0];
            -z[0].abs().ln()
        }
        fn parameter_names(&self) -> Vec<String> {
            vec!["q".into()]
        }
        fn constrained_draw(&self, z: &[f64]) -> Vec<f64> {
            z.to_vec()
        }
    }

    #[test]
    fn free_particle_motion() {
        let mut s = PhaseState::at(&Flat, vec![0.5, -1.0]);
        s.p = vec![2.0, 0.25];
        let end = leapfrog(&s, &Flat, 0.1, 7, &[1.0, 1.0]).unwrap();
        assert!((end.q[0] - (0.5 + 0.1 * 7.0 * 2.0)).abs() < 1e-14);
        assert!((end.q[1] - (-1.0 + 0.1 * 7.0 * 0.25)).abs() < 1e-14);
        assert_eq!(end.p, s.p);
    }

    #[test]
    fn reversibility() {
        let g = Gaussian {
            scales: vec![1.0, 0.3, 2.0],
        };
        let inv_mass = [1.0, 0.2, 3.0];
        let mut s = PhaseState::at(&g, vec![0.4, -0.1, 1.5]);
        s.p = vec![0.7, -1.2, 0.3];
        let fwd = leapfrog(&s, &g, 0.05, 25, &inv_mass).unwrap();
        let mut back = fwd.clone();
        back.p.iter_mut().for_each(|p| *p = -*p);
        let home = leapfrog(&back, &g, 0.05, 25, &inv_mass).unwrap();
        for d in 0..3 {
            assert!((home.q[d] - s.q[d]).abs() < 1e-10);
            assert!((home.p[d] + s.p[d]).abs() < 1e-10);
        }
    }

    #[test]
    fn energy_error_is_second_order() {
        let g = Gaussian { scales: vec![1.0] };
        let mut s = PhaseState::at(&g, vec![1.0]);
        s.p = vec![0.5];
        let de = |eps: f64, steps: usize| {
            let end = leapfrog(&s, &g, eps, steps, &[1.0]).unwrap();
            (end.energy(&[1.0]) - s.energy(&[1.0])).abs()
        };
        let coarse = de(0.1, 10);
        let fine = de(0.05, 20);
        assert!(coarse < 1e-3, "{coarse}");
        let ratio = coarse / fine;
        assert!((3.5..=4.5).contains(&ratio), "{ratio}");
    }

    #[test]
    fn zero_length_trajectory_is_always_accepted() {
        let g = Gaussian {
            scales: vec![1.0, 2.0],
        };
        let s = PhaseState::at(&g, vec![0.3, -0.4]);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let (next, st) = hmc_step(
                &s,
                &g,
                0.5,
                TrajectoryLength::Fixed(0),
                &[1.0, 1.0],
                1000.0,
                &mut rng,
            );
            assert!(st.accepted);
            assert_eq!(st.energy_error, 0.0);
            assert_eq!(next.q, s.q);
        }
    }

    #[test]
    fn pole_produces_divergence_and_keeps_position() {
        let s = PhaseState::at(&Pole, vec![1e-3]);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut seen = 0;
        for _ in 0..100 {
            let (next, st) = hmc_step(
                &s,
                &Pole,
                0.5,
                TrajectoryLength::Fixed(20),
                &[1.0],
                1000.0,
                &mut rng,
            );
            if st.divergent {
                seen += 1;
                assert!(!st.accepted);
                assert_eq!(next.q, s.q);
            }
        }
        assert!(seen > 0);
    }

    #[test]
    fn tuned_step_has_high_acceptance() {
        let g = Gaussian { scales: vec![1.0] };
        let mut s = PhaseState::at(&g, vec![0.0]);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut accepted = 0;
        for _ in 0..10_000 {
            let (next, st) = hmc_step(
                &s,
                &g,
                0.2,
                TrajectoryLength::Jittered { max: 16 },
                &[1.0],
                1000.0,
                &mut rng,
            );
            accepted += usize::from(st.accepted);
            s = next;
        }
        assert!(accepted as f64 / 10_000.0 >= 0.9);
    }

    #[test]
    fn volume_preservation() {
        let g = Gaussian { scales: vec![0.7] };
        let inv_mass = [1.7];
        let map = |q: f64, p: f64| {
            let mut s = PhaseState::at(&g, vec![q]);
            s.p = vec![p];
            let e = leapfrog(&s, &g, 0.13, 9, &inv_mass).unwrap();
            (e.q[0], e.p[0])
        };
        let (q0, p0, h) = (0.4, -0.9, 1e-6);
        let (a1, b1) = map(q0 + h, p0);
        let (a2, b2) = map(q0 - h, p0);
        let (c1, d1) = map(q0, p0 + h);
        let (c2, d2) = map(q0, p0 - h);
        let det = ((a1 - a2) * (d1 - d2) - (c1 - c2) * (b1 - b2)) / (4.0 * h * h);
        assert!((det - 1.0).abs() < 1e-6, "{det}");
    }
}
