//! Density kernels, constraint transforms and gradient machinery.

pub mod density;
pub mod dual;
pub mod gradient;
pub mod matrix;
pub mod transform;

pub use density::{
    cauchy_inv_cdf, half_cauchy_lpdf, lkj_cholesky_lpdf, normal_lpdf, DensityKernel, HALF_LN_TWO_PI,
};
pub use dual::{Dual, Real};
pub use gradient::{finite_difference_gradient, gradient, gradient_matches};
pub use matrix::Matrix;
pub use transform::{Constrained, ConstraintTransform};
