use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Arithmetic shared by plain reals and the forward-mode towers.
///
/// Every formula in the engine that must be differentiated is written once
/// against this trait and instantiated with `f64`, [`Dual`](super::Dual) or
/// [`Taylor`](super::Taylor).
pub trait Scalar:
    Clone
    + Debug
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn from_f64(v: f64) -> Self;

    /// Real part (the primal value).
    fn value(&self) -> f64;

    /// True when the number carries no derivative information.
    fn is_plain(&self) -> bool;

    fn sqrt(self) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn atan(self) -> Self;
    fn powi(self, n: i32) -> Self;
    fn powf(self, p: f64) -> Self;

    fn recip(self) -> Self {
        Self::from_f64(1.0) / self
    }

    fn scale(self, k: f64) -> Self {
        self * Self::from_f64(k)
    }

    fn offset(self, k: f64) -> Self {
        self + Self::from_f64(k)
    }

    fn zero() -> Self {
        Self::from_f64(0.0)
    }

    fn one() -> Self {
        Self::from_f64(1.0)
    }
}

impl Scalar for f64 {
    fn from_f64(v: f64) -> Self {
        v
    }
    fn value(&self) -> f64 {
        *self
    }
    fn is_plain(&self) -> bool {
        true
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn atan(self) -> Self {
        f64::atan(self)
    }
    fn powi(self, n: i32) -> Self {
        f64::powi(self, n)
    }
    fn powf(self, p: f64) -> Self {
        f64::powf(self, p)
    }
    fn recip(self) -> Self {
        1.0 / self
    }
    fn scale(self, k: f64) -> Self {
        self * k
    }
    fn offset(self, k: f64) -> Self {
        self + k
    }
}

/// Sum of an iterator of scalars (zero when empty).
pub fn sum<T: Scalar>(items: impl IntoIterator<Item = T>) -> T {
    let mut it = items.into_iter();
    match it.next() {
        None => T::zero(),
        Some(first) => it.fold(first, |acc, v| acc + v),
    }
}

/// `sum_i u_i v_i`.
pub fn dot<T: Scalar>(u: &[T], v: &[T]) -> T {
    sum(u.iter().zip(v).map(|(a, b)| a.clone() * b.clone()))
}
