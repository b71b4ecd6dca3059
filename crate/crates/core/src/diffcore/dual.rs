//! Single-direction dual numbers, nestable to build hyper-dual towers.
//!
//! `Dual<Dual<Dual<f64>>>` seeded along three (possibly repeated) axes
//! carries every partial derivative of order ≤ 3 in those axes.

use std::ops::{Add, Div, Mul, Neg, Sub};

use super::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dual<T> {
    pub re: T,
    pub eps: T,
}

impl<T: Scalar> Dual<T> {
    pub fn new(re: T, eps: T) -> Self {
        Self { re, eps }
    }

    pub fn constant(re: T) -> Self {
        Self { re, eps: T::zero() }
    }
}

impl<T: Scalar> Add for Dual<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.re + rhs.re, self.eps + rhs.eps)
    }
}

impl<T: Scalar> Sub for Dual<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.re - rhs.re, self.eps - rhs.eps)
    }
}

impl<T: Scalar> Mul for Dual<T> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let eps = self.re.clone() * rhs.eps + self.eps * rhs.re.clone();
        Self::new(self.re * rhs.re, eps)
    }
}

impl<T: Scalar> Div for Dual<T> {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        let inv = rhs.re.clone().recip();
        let re = self.re * inv.clone();
        let eps = (self.eps - re.clone() * rhs.eps) * inv;
        Self::new(re, eps)
    }
}

impl<T: Scalar> Neg for Dual<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.re, -self.eps)
    }
}

impl<T: Scalar> Scalar for Dual<T> {
    fn from_f64(v: f64) -> Self {
        Self::constant(T::from_f64(v))
    }

    fn value(&self) -> f64 {
        self.re.value()
    }

    fn is_plain(&self) -> bool {
        false
    }

    fn sqrt(self) -> Self {
        let s = self.re.sqrt();
        let eps = self.eps / s.clone().scale(2.0);
        Self::new(s, eps)
    }

    fn sin(self) -> Self {
        let eps = self.eps * self.re.clone().cos();
        Self::new(self.re.sin(), eps)
    }

    fn cos(self) -> Self {
        let eps = -(self.eps * self.re.clone().sin());
        Self::new(self.re.cos(), eps)
    }

    fn exp(self) -> Self {
        let e = self.re.exp();
        Self::new(e.clone(), self.eps * e)
    }

    fn ln(self) -> Self {
        let eps = self.eps / self.re.clone();
        Self::new(self.re.ln(), eps)
    }

    fn atan(self) -> Self {
        let denom = (self.re.clone() * self.re.clone()).offset(1.0);
        let eps = self.eps / denom;
        Self::new(self.re.atan(), eps)
    }

    fn powi(self, n: i32) -> Self {
        if n == 0 {
            return Self::from_f64(1.0);
        }
        let d = self.re.clone().powi(n - 1).scale(n as f64);
        Self::new(self.re.powi(n), self.eps * d)
    }

    fn powf(self, p: f64) -> Self {
        let d = self.re.clone().powf(p - 1.0).scale(p);
        Self::new(self.re.powf(p), self.eps * d)
    }
}

pub type Dual2 = Dual<Dual<f64>>;
pub type Dual3 = Dual<Dual<Dual<f64>>>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_derivative_of_sqrt() {
        let x = Dual::new(4.0, 1.0);
        let y = x.sqrt();
        assert_eq!(y.re, 2.0);
        assert_eq!(y.eps, 0.25);
    }

    #[test]
    fn nested_gives_second_derivative() {
        // f = x^3 at x = 2: f'' = 12
        let x = Dual::new(Dual::new(2.0, 1.0), Dual::new(1.0, 0.0));
        let y = x.clone() * x.clone() * x;
        assert_eq!(y.eps.eps, 12.0);
        assert_eq!(y.re.eps, 12.0);
        assert_eq!(y.eps.re, 12.0);
    }

    #[test]
    fn quotient_rule() {
        let x = Dual::new(3.0, 1.0);
        let y = Dual::from_f64(1.0) / x;
        assert!((y.eps + 1.0 / 9.0).abs() < 1e-16);
    }
}
