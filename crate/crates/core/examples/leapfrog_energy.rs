//! Energy error of the leapfrog integrator on a standard Gaussian: halving
//! the step at fixed integration time cuts the error by about four.

use hbayes::models::LogDensity;
use hbayes::sampler::{leapfrog, PhaseState};

struct StdNormal(usize);

impl LogDensity for StdNormal {
    fn dim(&self) -> usize {
        self.0
    }

    fn log_density_gradient(&self, z: &[f64], grad: &mut [f64]) -> f64 {
        for (g, x) in grad.iter_mut().zip(z) {
            *g = -x;
        }
        -0.5 * z.iter().map(|x| x * x).sum::<f64>()
    }

    fn parameter_names(&self) -> Vec<String> {
        (1..=self.0).map(|i| format!("x[{i}]")).collect()
    }

    fn constrained_draw(&self, z: &[f64]) -> Vec<f64> {
        z.to_vec()
    }
}

fn main() {
    let model = StdNormal(1);
    let metric = [1.0];
    let mut start = PhaseState::at(&model, vec![1.0]);
    start.p = vec![0.5];
    let h0 = start.energy(&metric);

    println!("{:>8} {:>6} {:>12} {:>8}", "eps", "steps", "|dH|", "ratio");
    let mut previous: Option<f64> = None;
    for k in 0..6 {
        let eps = 0.1 / 2f64.powi(k);
        let steps = 10 * 2usize.pow(k as u32);
        let end = leapfrog(&start, &model, eps, steps, &metric).expect("finite trajectory");
        let dh = (end.energy(&metric) - h0).abs();
        let ratio = previous.map_or(String::new(), |p| format!("{:.3}", p / dh));
        println!("{eps:>8.5} {steps:>6} {dh:>12.3e} {ratio:>8}");
        previous = Some(dh);
    }

    // Reversibility: flip the momentum, integrate back, land where we began.
    let forward = leapfrog(&start, &model, 0.1, 25, &metric).expect("finite trajectory");
    let mut flipped = forward.clone();
    flipped.p.iter_mut().for_each(|p| *p = -*p);
    let back = leapfrog(&flipped, &model, 0.1, 25, &metric).expect("finite trajectory");
    println!(
        "round trip position error {:.2e}",
        (back.q[0] - start.q[0]).abs()
    );
}
