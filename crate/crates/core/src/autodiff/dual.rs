use std::ops::{Add, Div, Mul, Neg, Sub};

use super::Activation;

/// Forward-mode dual number carrying `N` independent tangent directions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dual<const N: usize> {
    pub re: f64,
    pub eps: [f64; N],
}

impl<const N: usize> Dual<N> {
    pub fn constant(re: f64) -> Self {
        Self { re, eps: [0.0; N] }
    }

    /// A variable seeded along tangent direction `dir`.
    pub fn variable(re: f64, dir: usize) -> Self {
        let mut eps = [0.0; N];
        eps[dir] = 1.0;
        Self { re, eps }
    }

    #[inline]
    fn chain(self, value: f64, slope: f64) -> Self {
        let mut eps = self.eps;
        for e in &mut eps {
            *e *= slope;
        }
        Self { re: value, eps }
    }

    pub fn sqrt(self) -> Self {
        let s = self.re.sqrt();
        self.chain(s, 0.5 / s)
    }

    pub fn exp(self) -> Self {
        let e = self.re.exp();
        self.chain(e, e)
    }

    pub fn ln(self) -> Self {
        self.chain(self.re.ln(), 1.0 / self.re)
    }

    pub fn tanh(self) -> Self {
        let t = self.re.tanh();
        self.chain(t, 1.0 - t * t)
    }

    pub fn powi(self, n: i32) -> Self {
        self.chain(self.re.powi(n), n as f64 * self.re.powi(n - 1))
    }
}

impl<const N: usize> Add for Dual<N> {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        self.re += rhs.re;
        for (a, b) in self.eps.iter_mut().zip(rhs.eps) {
            *a += b;
        }
        self
    }
}

impl<const N: usize> Sub for Dual<N> {
    type Output = Self;
    fn sub(mut self, rhs: Self) -> Self {
        self.re -= rhs.re;
        for (a, b) in self.eps.iter_mut().zip(rhs.eps) {
            *a -= b;
        }
        self
    }
}

impl<const N: usize> Mul for Dual<N> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let mut eps = [0.0; N];
        for (k, e) in eps.iter_mut().enumerate() {
            *e = self.eps[k] * rhs.re + self.re * rhs.eps[k];
        }
        Self {
            re: self.re * rhs.re,
            eps,
        }
    }
}

impl<const N: usize> Div for Dual<N> {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        let inv = 1.0 / rhs.re;
        let mut eps = [0.0; N];
        for (k, e) in eps.iter_mut().enumerate() {
            *e = (self.eps[k] - self.re * inv * rhs.eps[k]) * inv;
        }
        Self {
            re: self.re * inv,
            eps,
        }
    }
}

impl<const N: usize> Neg for Dual<N> {
    type Output = Self;
    fn neg(self) -> Self {
        self.chain(-self.re, -1.0)
    }
}

/// Arithmetic shared by `f64` and [`Dual`], so one network evaluation routine
/// serves both plain and tangent-carrying inputs.
pub trait Scalar:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Div<Output = Self>
{
    fn from_f64(v: f64) -> Self;
    fn re(self) -> f64;
    fn scale(self, c: f64) -> Self;
    fn activate(self, act: Activation) -> Self;
}

impl Scalar for f64 {
    #[inline]
    fn from_f64(v: f64) -> Self {
        v
    }
    #[inline]
    fn re(self) -> f64 {
        self
    }
    #[inline]
    fn scale(self, c: f64) -> Self {
        self * c
    }
    #[inline]
    fn activate(self, act: Activation) -> Self {
        act.apply(self)
    }
}

impl<const N: usize> Scalar for Dual<N> {
    fn from_f64(v: f64) -> Self {
        Dual::constant(v)
    }
    fn re(self) -> f64 {
        self.re
    }
    fn scale(self, c: f64) -> Self {
        self.chain(self.re * c, c)
    }
    fn activate(self, act: Activation) -> Self {
        self.chain(act.apply(self.re), act.derivative(self.re))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_rule_per_direction() {
        let x = Dual::<2>::variable(3.0, 0);
        let y = Dual::<2>::variable(-2.0, 1);
        let f = x * x * y + (x / y).exp();
        let r = x.re / y.re;
        assert!((f.eps[0] - (2.0 * x.re * y.re + r.exp() / y.re)).abs() < 1e-12);
        assert!((f.eps[1] - (x.re * x.re - r.exp() * x.re / (y.re * y.re))).abs() < 1e-12);
    }

    #[test]
    fn elementary_functions() {
        let x = Dual::<1>::variable(0.3, 0);
        assert!((x.tanh().eps[0] - (1.0 - 0.3f64.tanh().powi(2))).abs() < 1e-15);
        assert!((x.sqrt().eps[0] - 0.5 / 0.3f64.sqrt()).abs() < 1e-15);
        assert!((x.ln().eps[0] - 1.0 / 0.3).abs() < 1e-12);
        assert!((x.powi(3).eps[0] - 3.0 * 0.09).abs() < 1e-15);
        assert_eq!((-x).eps[0], -1.0);
    }
}
