//! Log-density kernels for the prior and likelihood families used by the
//! models.

use std::f64::consts::PI;

use super::Matrix;
use crate::{Error, Result};

/// `½·ln(2π)`.
pub const HALF_LN_TWO_PI: f64 = 0.918_938_533_204_672_8;

/// Gaussian log density with the normalizing constant included.
pub fn normal_lpdf(x: f64, mu: f64, sd: f64) -> Result<f64> {
    if !(sd > 0.0) {
        return Err(Error::domain(
            "normal_lpdf",
            format!("sd must be positive, got {sd}"),
        ));
    }
    Ok(normal_lpdf_unchecked(x, mu, sd))
}

#[inline]
pub(crate) fn normal_lpdf_unchecked(x: f64, mu: f64, sd: f64) -> f64 {
    let z = (x - mu) / sd;
    -0.5 * z * z - sd.ln() - HALF_LN_TWO_PI
}

/// Half-Cauchy log density on `[0, ∞)`, including the factor 2 from folding.
pub fn half_cauchy_lpdf(x: f64, scale: f64) -> Result<f64> {
    if !(scale > 0.0) {
        return Err(Error::domain(
            "half_cauchy_lpdf",
            format!("scale must be positive, got {scale}"),
        ));
    }
    if !(x >= 0.0) {
        return Err(Error::domain(
            "half_cauchy_lpdf",
            format!("x must be nonnegative, got {x}"),
        ));
    }
    Ok(half_cauchy_lpdf_unchecked(x, scale))
}

#[inline]
pub(crate) fn half_cauchy_lpdf_unchecked(x: f64, scale: f64) -> f64 {
    let r = x / scale;
    (2.0 / (PI * scale)).ln() - r.mul_add(r, 1.0).ln()
}

/// Unnormalized LKJ log density of a correlation matrix expressed through its
/// Cholesky factor: `Σ_{k=2..K} (K − k + 2η − 2)·ln L_kk`.
///
/// The normalizing constant is omitted.
pub fn lkj_cholesky_lpdf(l: &Matrix, eta: f64) -> Result<f64> {
    if !(eta >= 1.0) {
        return Err(Error::domain(
            "lkj_cholesky_lpdf",
            format!("eta must be >= 1, got {eta}"),
        ));
    }
    let k = l.rows();
    if l.cols() != k {
        return Err(Error::Shape {
            what: "Cholesky factor columns",
            expected: k,
            found: l.cols(),
        });
    }
    for i in 0..k {
        if !(l[(i, i)] > 0.0) {
            return Err(Error::domain(
                "lkj_cholesky_lpdf",
                format!("diagonal entry {i} is not positive"),
            ));
        }
        let norm2: f64 = (0..=i).map(|j| l[(i, j)] * l[(i, j)]).sum();
        if (norm2.sqrt() - 1.0).abs() > 1e-8 {
            return Err(Error::domain(
                "lkj_cholesky_lpdf",
                format!("row {i} has norm {} instead of 1", norm2.sqrt()),
            ));
        }
        if (i + 1..k).any(|j| l[(i, j)] != 0.0) {
            return Err(Error::domain(
                "lkj_cholesky_lpdf",
                format!("row {i} has entries above the diagonal"),
            ));
        }
    }
    let diag: Vec<f64> = (0..k).map(|i| l[(i, i)]).collect();
    Ok(lkj_cholesky_lpdf_diag(&diag, eta))
}

/// LKJ kernel given only the diagonal of the Cholesky factor.
pub(crate) fn lkj_cholesky_lpdf_diag(diag: &[f64], eta: f64) -> f64 {
    let k = diag.len();
    (1..k)
        .map(|i| lkj_coefficient(k, i, eta) * diag[i].ln())
        .sum()
}

/// Coefficient on `ln L_ii` (zero-based row `i`) in the LKJ-Cholesky kernel.
#[inline]
pub(crate) fn lkj_coefficient(k: usize, i: usize, eta: f64) -> f64 {
    k as f64 - i as f64 - 3.0 + 2.0 * eta
}

/// Quantile function of the Cauchy distribution with location `lambda` and
/// scale `cauchy_scale`.
pub fn cauchy_inv_cdf(w: f64, lambda: f64, cauchy_scale: f64) -> Result<f64> {
    if !(w > 0.0 && w < 1.0) {
        return Err(Error::domain(
            "cauchy_inv_cdf",
            format!("w must lie in (0,1), got {w}"),
        ));
    }
    if !(cauchy_scale > 0.0) {
        return Err(Error::domain(
            "cauchy_inv_cdf",
            format!("scale must be positive, got {cauchy_scale}"),
        ));
    }
    Ok(lambda + cauchy_scale * (PI * (w - 0.5)).tan())
}

/// A validated prior or likelihood family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DensityKernel {
    Normal { mu: f64, sd: f64 },
    HalfCauchy { scale: f64 },
    UniformInterval { lower: f64, upper: f64 },
    LkjCholesky { eta: f64 },
}

impl DensityKernel {
    pub fn normal(mu: f64, sd: f64) -> Result<Self> {
        if !(sd > 0.0) || !mu.is_finite() {
            return Err(Error::domain(
                "DensityKernel::normal",
                format!("invalid (mu, sd) = ({mu}, {sd})"),
            ));
        }
        Ok(DensityKernel::Normal { mu, sd })
    }

    pub fn half_cauchy(scale: f64) -> Result<Self> {
        if !(scale > 0.0) {
            return Err(Error::domain(
                "DensityKernel::half_cauchy",
                format!("scale {scale}"),
            ));
        }
        Ok(DensityKernel::HalfCauchy { scale })
    }

    pub fn uniform(lower: f64, upper: f64) -> Result<Self> {
        if !(lower < upper) {
            return Err(Error::domain(
                "DensityKernel::uniform",
                format!("need lower < upper, got ({lower}, {upper})"),
            ));
        }
        Ok(DensityKernel::UniformInterval { lower, upper })
    }

    pub fn lkj_cholesky(eta: f64) -> Result<Self> {
        if !(eta >= 1.0) {
            return Err(Error::domain(
                "DensityKernel::lkj_cholesky",
                format!("eta {eta}"),
            ));
        }
        Ok(DensityKernel::LkjCholesky { eta })
    }

    /// Log density at a scalar point. LKJ is matrix-valued and rejected here;
    /// use [`lkj_cholesky_lpdf`].
    pub fn lpdf(&self, x: f64) -> Result<f64> {
        match *self {
            DensityKernel::Normal { mu, sd } => normal_lpdf(x, mu, sd),
            DensityKernel::HalfCauchy { scale } => half_cauchy_lpdf(x, scale),
            DensityKernel::UniformInterval { lower, upper } => {
                if x >= lower && x <= upper {
                    Ok(-(upper - lower).ln())
                } else {
                    Ok(f64::NEG_INFINITY)
                }
            }
            DensityKernel::LkjCholesky { .. } => Err(Error::domain(
                "DensityKernel::lpdf",
                "LKJ kernel is defined on Cholesky factors, not scalars",
            )),
        }
    }
}
