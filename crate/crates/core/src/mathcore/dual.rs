//! Forward-mode dual numbers carrying a dense derivative vector.

use std::ops::{Add, Div, Mul, Neg, Sub};

/// Scalar arithmetic shared by `f64` and [`Dual`], so that kernels written
/// once can be evaluated with or without derivatives.
pub trait Real:
    Clone
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
{
    fn value(&self) -> f64;
    /// A constant with the same derivative layout as `self`.
    fn lift(&self, c: f64) -> Self;
    fn exp(&self) -> Self;
    fn ln(&self) -> Self;
    fn sqrt(&self) -> Self;
    fn tan(&self) -> Self;
    fn tanh(&self) -> Self;
    fn square(&self) -> Self {
        self.clone() * self.clone()
    }
    /// `ln(1 - x)`.
    fn ln_1m(&self) -> Self {
        (-self.clone() + 1.0).ln()
    }
}

impl Real for f64 {
    fn value(&self) -> f64 {
        *self
    }
    fn lift(&self, c: f64) -> Self {
        c
    }
    fn exp(&self) -> Self {
        f64::exp(*self)
    }
    fn ln(&self) -> Self {
        f64::ln(*self)
    }
    fn sqrt(&self) -> Self {
        f64::sqrt(*self)
    }
    fn tan(&self) -> Self {
        f64::tan(*self)
    }
    fn tanh(&self) -> Self {
        f64::tanh(*self)
    }
    fn ln_1m(&self) -> Self {
        (-*self).ln_1p()
    }
}

/// A value together with its partial derivatives with respect to a fixed set
/// of seeded inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct Dual {
    pub value: f64,
    pub deriv: Vec<f64>,
}

impl Dual {
    pub fn constant(value: f64, n: usize) -> Self {
        Dual {
            value,
            deriv: vec![0.0; n],
        }
    }

    /// The `index`-th of `n` independent variables.
    pub fn variable(value: f64, index: usize, n: usize) -> Self {
        let mut deriv = vec![0.0; n];
        deriv[index] = 1.0;
        Dual { value, deriv }
    }

    /// Seeds one variable per coordinate of `point`.
    pub fn seed(point: &[f64]) -> Vec<Dual> {
        let n = point.len();
        point
            .iter()
            .enumerate()
            .map(|(i, &v)| Dual::variable(v, i, n))
            .collect()
    }

    /// Applies a scalar function with known value `f` and derivative `df`.
    fn chain(&self, f: f64, df: f64) -> Dual {
        Dual {
            value: f,
            deriv: self.deriv.iter().map(|d| d * df).collect(),
        }
    }

    fn combine(a: &[f64], b: &[f64], wa: f64, wb: f64) -> Vec<f64> {
        // a constant lifted from f64 may have an empty derivative vector
        match (a.is_empty(), b.is_empty()) {
            (true, true) => Vec::new(),
            (true, false) => b.iter().map(|y| wb * y).collect(),
            (false, true) => a.iter().map(|x| wa * x).collect(),
            (false, false) => a.iter().zip(b).map(|(x, y)| wa * x + wb * y).collect(),
        }
    }
}

impl Add for Dual {
    type Output = Dual;
    fn add(self, rhs: Dual) -> Dual {
        Dual {
            value: self.value + rhs.value,
            deriv: Dual::combine(&self.deriv, &rhs.deriv, 1.0, 1.0),
        }
    }
}

impl Sub for Dual {
    type Output = Dual;
    fn sub(self, rhs: Dual) -> Dual {
        Dual {
            value: self.value - rhs.value,
            deriv: Dual::combine(&self.deriv, &rhs.deriv, 1.0, -1.0),
        }
    }
}

impl Mul for Dual {
    type Output = Dual;
    fn mul(self, rhs: Dual) -> Dual {
        Dual {
            value: self.value * rhs.value,
            deriv: Dual::combine(&self.deriv, &rhs.deriv, rhs.value, self.value),
        }
    }
}

impl Div for Dual {
    type Output = Dual;
    fn div(self, rhs: Dual) -> Dual {
        let inv = 1.0 / rhs.value;
        Dual {
            value: self.value * inv,
            deriv: Dual::combine(&self.deriv, &rhs.deriv, inv, -self.value * inv * inv),
        }
    }
}

impl Neg for Dual {
    type Output = Dual;
    fn neg(self) -> Dual {
        self.chain(-self.value, -1.0)
    }
}

impl Add<f64> for Dual {
    type Output = Dual;
    fn add(mut self, rhs: f64) -> Dual {
        self.value += rhs;
        self
    }
}

impl Sub<f64> for Dual {
    type Output = Dual;
    fn sub(mut self, rhs: f64) -> Dual {
        self.value -= rhs;
        self
    }
}

impl Mul<f64> for Dual {
    type Output = Dual;
    fn mul(self, rhs: f64) -> Dual {
        self.chain(self.value * rhs, rhs)
    }
}

impl Div<f64> for Dual {
    type Output = Dual;
    fn div(self, rhs: f64) -> Dual {
        self.chain(self.value / rhs, 1.0 / rhs)
    }
}

impl Real for Dual {
    fn value(&self) -> f64 {
        self.value
    }
    fn lift(&self, c: f64) -> Self {
        Dual::constant(c, self.deriv.len())
    }
    fn exp(&self) -> Self {
        let e = self.value.exp();
        self.chain(e, e)
    }
    fn ln(&self) -> Self {
        self.chain(self.value.ln(), 1.0 / self.value)
    }
    fn sqrt(&self) -> Self {
        let s = self.value.sqrt();
        self.chain(s, 0.5 / s)
    }
    fn tan(&self) -> Self {
        let t = self.value.tan();
        self.chain(t, 1.0 + t * t)
    }
    fn tanh(&self) -> Self {
        let t = self.value.tanh();
        self.chain(t, 1.0 - t * t)
    }
    fn ln_1m(&self) -> Self {
        self.chain((-self.value).ln_1p(), -1.0 / (1.0 - self.value))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn composite<T: Real>(x: &[T]) -> T {
        // exp(x0) * ln(x1) / sqrt(x0 + x1) + tanh(x0 * x1) - tan(x1 / 4)
        let a = x[0].exp() * x[1].ln() / (x[0].clone() + x[1].clone()).sqrt();
        let b = (x[0].clone() * x[1].clone()).tanh();
        let c = (x[1].clone() / 4.0).tan();
        a + b - c + x[0].square() * 0.5 - (x[1].clone() * 0.1).ln_1m()
    }

    #[test]
    fn composite_derivatives_match_central_differences() {
        let point = [0.7, 1.9];
        let d = composite(&Dual::seed(&point));
        assert!((d.value - composite(&point)).abs() < 1e-15);
        for i in 0..2 {
            let h = 1e-6;
            let mut up = point;
            let mut dn = point;
            up[i] += h;
            dn[i] -= h;
            let fd = (composite(&up) - composite(&dn)) / (2.0 * h);
            assert!(
                (d.deriv[i] - fd).abs() < 1e-7,
                "{i}: {} vs {fd}",
                d.deriv[i]
            );
        }
    }

    #[test]
    fn lifted_constants_do_not_contribute() {
        let x = Dual::variable(3.0, 0, 1);
        let c = x.lift(2.0);
        let y = x * c;
        assert_eq!(y.value, 6.0);
        assert_eq!(y.deriv, vec![2.0]);
    }
}
