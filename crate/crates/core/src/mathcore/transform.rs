//! Bijections between unconstrained reals and constrained parameter spaces,
//! with the log absolute Jacobian determinant of the constraining map.

use super::{Matrix, Real};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ConstraintTransform {
    Identity,
    /// `x = exp(z)`.
    PositiveLog,
    /// `x = lower + (upper − lower)·logistic(z)`.
    Interval {
        lower: f64,
        upper: f64,
    },
    /// `dim·(dim−1)/2` reals to the Cholesky factor of a `dim × dim`
    /// correlation matrix, via canonical partial correlations.
    CholeskyCorrelation {
        dim: usize,
    },
}

/// Output of [`ConstraintTransform::constrain`]. For the Cholesky transform
/// `values` holds the factor in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct Constrained {
    pub values: Vec<f64>,
    pub log_jacobian: f64,
}

#[inline]
pub(crate) fn logistic(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + exp(z))` without overflow.
#[inline]
pub(crate) fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// Log-Jacobian of the interval map at `z`: `ln(b−a) + ln s + ln(1−s)`.
#[inline]
pub(crate) fn interval_log_jacobian(z: f64, width: f64) -> f64 {
    width.ln() - softplus(-z) - softplus(z)
}

impl ConstraintTransform {
    /// Number of unconstrained coordinates consumed.
    pub fn unconstrained_len(&self) -> usize {
        match *self {
            ConstraintTransform::CholeskyCorrelation { dim } => dim * dim.saturating_sub(1) / 2,
            _ => 1,
        }
    }

    pub fn constrain(&self, z: &[f64]) -> Result<Constrained> {
        let expected = self.unconstrained_len();
        if z.len() != expected {
            return Err(Error::Shape {
                what: "unconstrained input",
                expected,
                found: z.len(),
            });
        }
        Ok(match *self {
            ConstraintTransform::Identity => Constrained {
                values: vec![z[0]],
                log_jacobian: 0.0,
            },
            ConstraintTransform::PositiveLog => Constrained {
                values: vec![z[0].exp()],
                log_jacobian: z[0],
            },
            ConstraintTransform::Interval { lower, upper } => {
                let width = upper - lower;
                Constrained {
                    values: vec![lower + width * logistic(z[0])],
                    log_jacobian: interval_log_jacobian(z[0], width),
                }
            }
            ConstraintTransform::CholeskyCorrelation { dim } => {
                let (l, lj) = cholesky_corr_constrain(z, dim, 0.0);
                Constrained {
                    values: l,
                    log_jacobian: lj,
                }
            }
        })
    }

    pub fn unconstrain(&self, x: &[f64]) -> Result<Vec<f64>> {
        let check_len = |n: usize| {
            if x.len() != n {
                Err(Error::Shape {
                    what: "constrained input",
                    expected: n,
                    found: x.len(),
                })
            } else {
                Ok(())
            }
        };
        match *self {
            ConstraintTransform::Identity => {
                check_len(1)?;
                Ok(vec![x[0]])
            }
            ConstraintTransform::PositiveLog => {
                check_len(1)?;
                if !(x[0] > 0.0) {
                    return Err(Error::domain(
                        "unconstrain",
                        format!("{} is not positive", x[0]),
                    ));
                }
                Ok(vec![x[0].ln()])
            }
            ConstraintTransform::Interval { lower, upper } => {
                check_len(1)?;
                if !(x[0] > lower && x[0] < upper) {
                    return Err(Error::domain(
                        "unconstrain",
                        format!("{} outside ({lower}, {upper})", x[0]),
                    ));
                }
                Ok(vec![((x[0] - lower) / (upper - x[0])).ln()])
            }
            ConstraintTransform::CholeskyCorrelation { dim } => {
                check_len(dim * dim)?;
                let l = Matrix::from_row_major(dim, dim, x.to_vec())?;
                cholesky_corr_unconstrain(&l)
            }
        }
    }
}

/// Canonical-partial-correlation construction of a correlation Cholesky
/// factor. Returns the row-major factor and the log-Jacobian. `zero` fixes the
/// derivative layout when `T` is a dual number.
pub fn cholesky_corr_constrain<T: Real>(z: &[T], dim: usize, zero: T) -> (Vec<T>, T) {
    debug_assert_eq!(z.len(), dim * dim.saturating_sub(1) / 2);
    let mut l: Vec<T> = vec![zero.lift(0.0); dim * dim];
    let mut log_jac = zero.lift(0.0);
    if dim == 0 {
        return (l, log_jac);
    }
    l[0] = zero.lift(1.0);
    let mut next = 0;
    for i in 1..dim {
        let cpc = z[next].tanh();
        next += 1;
        log_jac = log_jac + cpc.square().ln_1m();
        let mut sum_sq = cpc.square();
        l[i * dim] = cpc;
        for j in 1..i {
            let cpc = z[next].tanh();
            next += 1;
            log_jac = log_jac + cpc.square().ln_1m() + sum_sq.ln_1m() * 0.5;
            let entry = cpc * (-sum_sq.clone() + 1.0).sqrt();
            sum_sq = sum_sq + entry.square();
            l[i * dim + j] = entry;
        }
        l[i * dim + i] = (-sum_sq + 1.0).sqrt();
    }
    (l, log_jac)
}

/// Inverse of [`cholesky_corr_constrain`].
pub fn cholesky_corr_unconstrain(l: &Matrix) -> Result<Vec<f64>> {
    let dim = l.rows();
    let mut z = Vec::with_capacity(dim * dim.saturating_sub(1) / 2);
    for i in 1..dim {
        let mut sum_sq = 0.0;
        for j in 0..i {
            let remaining = 1.0 - sum_sq;
            let cpc = l[(i, j)] / remaining.sqrt();
            if !(cpc.abs() < 1.0) {
                return Err(Error::domain(
                    "cholesky_corr_unconstrain",
                    format!("entry ({i},{j}) is not a valid partial correlation"),
                ));
            }
            z.push(cpc.atanh());
            sum_sq += l[(i, j)] * l[(i, j)];
        }
    }
    Ok(z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mathcore::lkj_cholesky_lpdf;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn positive_log_at_zero() {
        let c = ConstraintTransform::PositiveLog.constrain(&[0.0]).unwrap();
        assert_eq!(c.values, vec![1.0]);
        assert_eq!(c.log_jacobian, 0.0);
    }

    #[test]
    fn interval_at_zero() {
        let t = ConstraintTransform::Interval {
            lower: 0.0,
            upper: PI / 2.0,
        };
        let c = t.constrain(&[0.0]).unwrap();
        assert!((c.values[0] - PI / 4.0).abs() < 1e-15);
        assert!((c.log_jacobian - ((PI / 2.0).ln() - 2.0 * 2f64.ln())).abs() < 1e-14);
    }

    #[test]
    fn interval_log_jacobian_matches_derivative() {
        let (a, b) = (-1.5, 4.0);
        let t = ConstraintTransform::Interval { lower: a, upper: b };
        for z in [-8.0, -1.0, 0.3, 2.0, 8.0] {
            let h = 1e-6;
            let up = t.constrain(&[z + h]).unwrap().values[0];
            let dn = t.constrain(&[z - h]).unwrap().values[0];
            let fd = ((up - dn) / (2.0 * h)).ln();
            let lj = t.constrain(&[z]).unwrap().log_jacobian;
            assert!((lj - fd).abs() < 1e-6, "z={z}: {lj} vs {fd}");
        }
    }

    #[test]
    fn shape_errors() {
        assert!(ConstraintTransform::PositiveLog.constrain(&[]).is_err());
        assert!(ConstraintTransform::CholeskyCorrelation { dim: 3 }
            .constrain(&[0.0, 0.1])
            .is_err());
    }

    #[test]
    fn cholesky_factor_is_valid_correlation_factor() {
        let t = ConstraintTransform::CholeskyCorrelation { dim: 4 };
        let z = [0.3, -1.2, 2.5, 0.0, -0.7, 4.0];
        let c = t.constrain(&z).unwrap();
        let l = Matrix::from_row_major(4, 4, c.values).unwrap();
        assert!(lkj_cholesky_lpdf(&l, 2.0).is_ok());
        let omega = l.matmul(&l.transpose()).unwrap();
        for i in 0..4 {
            assert!((omega[(i, i)] - 1.0).abs() < 1e-14);
        }
    }

    /// Log |det| of the Jacobian of z -> strictly-lower entries of L, by
    /// central differences and LU elimination.
    fn numeric_log_det(z: &[f64], dim: usize) -> f64 {
        let n = z.len();
        let lower = |z: &[f64]| -> Vec<f64> {
            let (l, _) = cholesky_corr_constrain(z, dim, 0.0);
            let mut out = Vec::new();
            for i in 1..dim {
                for j in 0..i {
                    out.push(l[i * dim + j]);
                }
            }
            out
        };
        let mut jac = vec![vec![0.0; n]; n];
        for c in 0..n {
            let h = 1e-6;
            let mut up = z.to_vec();
            let mut dn = z.to_vec();
            up[c] += h;
            dn[c] -= h;
            let (fu, fd) = (lower(&up), lower(&dn));
            for r in 0..n {
                jac[r][c] = (fu[r] - fd[r]) / (2.0 * h);
            }
        }
        let mut log_det = 0.0;
        for k in 0..n {
            let p = (k..n)
                .max_by(|&a, &b| jac[a][k].abs().partial_cmp(&jac[b][k].abs()).unwrap())
                .unwrap();
            jac.swap(k, p);
            log_det += jac[k][k].abs().ln();
            for r in k + 1..n {
                let f = jac[r][k] / jac[k][k];
                for c in k..n {
                    jac[r][c] -= f * jac[k][c];
                }
            }
        }
        log_det
    }

    #[test]
    fn cholesky_log_jacobian_matches_numeric_determinant() {
        for (dim, z) in [
            (2, vec![0.8]),
            (3, vec![0.4, -0.9, 1.1]),
            (4, vec![0.2, -0.4, 0.6, -0.8, 1.0, 0.1]),
        ] {
            let (_, lj) = cholesky_corr_constrain(&z, dim, 0.0);
            let numeric = numeric_log_det(&z, dim);
            assert!((lj - numeric).abs() < 1e-6, "dim {dim}: {lj} vs {numeric}");
        }
    }

    fn rel_close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0)
    }

    proptest! {
        #[test]
        fn scalar_round_trips(z in -10.0f64..10.0) {
            for t in [
                ConstraintTransform::Identity,
                ConstraintTransform::PositiveLog,
                ConstraintTransform::Interval { lower: -2.0, upper: 3.0 },
            ] {
                let x = t.constrain(&[z]).unwrap().values;
                let back = t.unconstrain(&x).unwrap();
                prop_assert!(rel_close(back[0], z), "{t:?}: {z} -> {:?} -> {back:?}", x);
                let again = t.constrain(&back).unwrap().values;
                prop_assert!(rel_close(again[0], x[0]));
                prop_assert!(t.constrain(&[z]).unwrap().log_jacobian.is_finite());
            }
        }

        #[test]
        fn cholesky_round_trips(z in proptest::collection::vec(-3.0f64..3.0, 6)) {
            let t = ConstraintTransform::CholeskyCorrelation { dim: 4 };
            let c = t.constrain(&z).unwrap();
            prop_assert!(c.log_jacobian.is_finite());
            let back = t.unconstrain(&c.values).unwrap();
            for (a, b) in back.iter().zip(&z) {
                prop_assert!(rel_close(*a, *b), "{a} vs {b}");
            }
            let again = t.constrain(&back).unwrap().values;
            for (a, b) in again.iter().zip(&c.values) {
                prop_assert!(rel_close(*a, *b));
            }
        }
    }
}
