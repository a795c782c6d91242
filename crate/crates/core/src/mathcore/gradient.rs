//! Gradient evaluation by forward-mode dual numbers and a central-difference
//! reference used to verify hand-derived gradients.

use super::Dual;
use crate::{Error, Result};

/// Exact gradient of `f` at `z` by seeding one dual direction per coordinate.
pub fn gradient<F>(f: F, z: &[f64]) -> Result<Vec<f64>>
where
    F: Fn(&[Dual]) -> Dual,
{
    if let Some(c) = z.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            coordinate: Some(c),
        });
    }
    let out = f(&Dual::seed(z));
    if !out.value.is_finite() {
        return Err(Error::NonFinite { coordinate: None });
    }
    let mut grad = out.deriv;
    // a constant function never touches the seeds
    grad.resize(z.len(), 0.0);
    if let Some(c) = grad.iter().position(|g| !g.is_finite()) {
        return Err(Error::NonFinite {
            coordinate: Some(c),
        });
    }
    Ok(grad)
}

/// Central differences with step `1e-5·max(1, |z_i|)` per coordinate.
pub fn finite_difference_gradient<F>(f: F, z: &[f64]) -> Vec<f64>
where
    F: Fn(&[f64]) -> f64,
{
    let mut work = z.to_vec();
    (0..z.len())
        .map(|i| {
            let h = 1e-5 * z[i].abs().max(1.0);
            work[i] = z[i] + h;
            let up = f(&work);
            work[i] = z[i] - h;
            let dn = f(&work);
            work[i] = z[i];
            (up - dn) / (2.0 * h)
        })
        .collect()
}

/// Componentwise agreement `|a − b| ≤ tol·max(1, |a|, |b|)`. Returns the
/// first offending coordinate on failure.
pub fn gradient_matches(a: &[f64], b: &[f64], tol: f64) -> std::result::Result<(), usize> {
    if a.len() != b.len() {
        return Err(a.len().min(b.len()));
    }
    for (i, (x, y)) in a.iter().zip(b).enumerate() {
        let scale = x.abs().max(y.abs()).max(1.0);
        if !((x - y).abs() <= tol * scale) {
            return Err(i);
        }
    }
    Ok(())
}
