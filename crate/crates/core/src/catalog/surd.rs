//! Exact arithmetic in `Q(ε, δ)` with `ε² = K`, `δ² = K − 1`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_rational::Ratio;

use crate::riemann::Ring;

pub type Rational = Ratio<i64>;

/// The parameters fixing `ε = √K` and `δ = ±√(K − 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SurdField {
    pub k: Rational,
    /// Sign of `δ`, `+1` or `−1`.
    pub delta_sign: i8,
}

impl SurdField {
    pub fn epsilon(self) -> Surd {
        Surd::basis(self, 1)
    }

    pub fn delta(self) -> Surd {
        Surd::basis(self, 2)
    }

    pub fn rational(self, v: Rational) -> Surd {
        Surd {
            field: Some(self),
            c: [v, Rational::from(0), Rational::from(0), Rational::from(0)],
        }
    }
}

/// `c₀ + c₁ε + c₂δ + c₃εδ` with rational coefficients.
///
/// Values created by [`Ring::zero`] or [`Ring::from_ratio`] carry no field;
/// they only ever appear with rational parts, so products never need `K`
/// unless both factors already know it.
#[derive(Debug, Clone, Copy)]
pub struct Surd {
    field: Option<SurdField>,
    c: [Rational; 4],
}

impl Surd {
    fn basis(field: SurdField, slot: usize) -> Surd {
        let mut c = [Rational::from(0); 4];
        c[slot] = Rational::from(1);
        Surd {
            field: Some(field),
            c,
        }
    }

    pub fn coefficients(&self) -> [Rational; 4] {
        self.c
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(|v| *v == Rational::from(0))
    }

    /// Numerical value; rational-only values need no field.
    pub fn to_f64(&self) -> f64 {
        let r = |v: Rational| *v.numer() as f64 / *v.denom() as f64;
        let (eps, delta) = match self.field {
            Some(f) => {
                let k = r(f.k);
                (k.sqrt(), f.delta_sign as f64 * (k - 1.0).sqrt())
            }
            None => (0.0, 0.0),
        };
        r(self.c[0]) + r(self.c[1]) * eps + r(self.c[2]) * delta + r(self.c[3]) * eps * delta
    }

    fn join(a: Option<SurdField>, b: Option<SurdField>) -> Option<SurdField> {
        match (a, b) {
            (Some(x), Some(y)) => {
                assert_eq!(x, y, "mixing surds from different fields");
                Some(x)
            }
            (x, None) | (None, x) => x,
        }
    }
}

impl PartialEq for Surd {
    fn eq(&self, other: &Surd) -> bool {
        self.c == other.c
    }
}

impl Add for Surd {
    type Output = Surd;
    fn add(self, o: Surd) -> Surd {
        Surd {
            field: Surd::join(self.field, o.field),
            c: [
                self.c[0] + o.c[0],
                self.c[1] + o.c[1],
                self.c[2] + o.c[2],
                self.c[3] + o.c[3],
            ],
        }
    }
}

impl Sub for Surd {
    type Output = Surd;
    fn sub(self, o: Surd) -> Surd {
        self + (-o)
    }
}

impl Neg for Surd {
    type Output = Surd;
    fn neg(self) -> Surd {
        Surd {
            field: self.field,
            c: self.c.map(|v| -v),
        }
    }
}

impl Mul for Surd {
    type Output = Surd;
    fn mul(self, o: Surd) -> Surd {
        let field = Surd::join(self.field, o.field);
        let (a, b) = (self.c, o.c);
        let irrational = |c: &[Rational; 4]| c[1..].iter().any(|v| *v != Rational::from(0));
        // Both factors irrational implies both carry the field.
        let (k, d2) = match field {
            Some(f) => (f.k, f.k - Rational::from(1)),
            None => {
                debug_assert!(!irrational(&a) || !irrational(&b));
                (Rational::from(0), Rational::from(0))
            }
        };
        // basis 1, ε, δ, εδ with ε² = k, δ² = d2
        Surd {
            field,
            c: [
                a[0] * b[0] + k * a[1] * b[1] + d2 * a[2] * b[2] + k * d2 * a[3] * b[3],
                a[0] * b[1] + a[1] * b[0] + d2 * (a[2] * b[3] + a[3] * b[2]),
                a[0] * b[2] + a[2] * b[0] + k * (a[1] * b[3] + a[3] * b[1]),
                a[0] * b[3] + a[3] * b[0] + a[1] * b[2] + a[2] * b[1],
            ],
        }
    }
}

impl Ring for Surd {
    fn zero() -> Self {
        Surd {
            field: None,
            c: [Rational::from(0); 4],
        }
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        Surd {
            field: None,
            c: [
                Rational::new(num, den),
                Rational::from(0),
                Rational::from(0),
                Rational::from(0),
            ],
        }
    }
}

impl fmt::Display for Surd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut first = true;
        for (v, name) in self.c.iter().zip(["", "ε", "δ", "εδ"]) {
            if *v == Rational::from(0) {
                continue;
            }
            let neg = *v < Rational::from(0);
            let abs = if neg { -*v } else { *v };
            match (first, neg) {
                (true, true) => f.write_str("-")?,
                (false, true) => f.write_str(" - ")?,
                (false, false) => f.write_str(" + ")?,
                (true, false) => {}
            }
            if name.is_empty() || abs != Rational::from(1) {
                write!(f, "{abs}")?;
            }
            f.write_str(name)?;
            first = false;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field(k: i64) -> SurdField {
        SurdField {
            k: Rational::from(k),
            delta_sign: 1,
        }
    }

    #[test]
    fn squares_reduce() {
        let f = field(4);
        let (e, d) = (f.epsilon(), f.delta());
        assert_eq!(e * e, f.rational(Rational::from(4)));
        assert_eq!(d * d, f.rational(Rational::from(3)));
        assert_eq!((e * d) * (e * d), f.rational(Rational::from(12)));
        assert_eq!((e * d).to_string(), "εδ");
    }

    #[test]
    fn numeric_value_tracks_sign() {
        let mut f = field(2);
        let x = f.delta() * Surd::from_ratio(3, 2) + f.epsilon();
        assert!((x.to_f64() - (1.5 + 2f64.sqrt())).abs() < 1e-15);
        f.delta_sign = -1;
        assert!((f.delta().to_f64() + 1.0).abs() < 1e-15);
    }

    #[test]
    fn ring_constants_mix_with_field_values() {
        let f = field(3);
        let e = f.epsilon();
        assert_eq!(Surd::zero() + e, e);
        assert_eq!(Surd::from_ratio(1, 3) * e * e, Surd::from_ratio(1, 1));
    }
}
