use serde::Serialize;

use crate::diffcore::{Scalar, Taylor};
use crate::error::{Error, EvalError, Result};
use crate::metricdsl::Expr;

/// The profile `φ` of an (α,β)-metric `F = α φ(β/α)`.
#[derive(Debug, Clone, PartialEq)]
pub enum PhiFunction {
    /// `φ(s) = 1 + s`
    Randers,
    /// `φ(s)` given as an expression in the variable `x1 = s`.
    Custom(Expr),
}

impl PhiFunction {
    pub fn is_randers(&self) -> bool {
        matches!(self, PhiFunction::Randers)
    }

    pub fn eval<T: Scalar>(&self, s: T) -> std::result::Result<T, EvalError> {
        match self {
            PhiFunction::Randers => Ok(s.offset(1.0)),
            PhiFunction::Custom(e) => e.eval(&[s]),
        }
    }

    /// `[φ, φ′, φ″, φ‴]` at `s`.
    pub fn derivatives(&self, s: f64) -> Result<[f64; 4]> {
        let t = Taylor::seed(&[s], 3).remove(0);
        let v = self.eval(t)?;
        Ok([
            v.value(),
            v.partial(&[0]),
            v.partial(&[0, 0]),
            v.partial(&[0, 0, 0]),
        ])
    }
}

/// The scalar functions of `s` that enter the mean Cartan and mean Landsberg
/// formulas of an (α,β)-metric.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhiMachinery {
    pub s: f64,
    pub b2: f64,
    pub n: usize,
    pub phi: f64,
    pub phi1: f64,
    pub q: f64,
    pub q1: f64,
    pub q2: f64,
    pub delta: f64,
    pub big_phi: f64,
    pub psi1: f64,
    pub psi2: f64,
    pub psi1_prime: f64,
}

const REGULARITY: f64 = 1e-10;

/// Series in `s` of the quantities above, up to the derivatives needed for
/// `Ψ₁′`.
fn general_series(phi: &PhiFunction, s: f64, b2: f64, n: usize) -> Result<PhiMachinery> {
    let order = 6;
    let t = Taylor::seed(&[s], order).remove(0);
    let f = phi.eval(t.clone())?;
    let f1 = f.diff(0);
    let denom = f.truncate(order - 1) - t.clone() * f1.clone();
    if denom.value().abs() <= REGULARITY {
        return Err(Error::Irregular(format!(
            "φ − sφ′ = {} at s = {s}",
            denom.value()
        )));
    }
    let q = f1.clone() / denom;
    let q1 = q.diff(0);
    let q2 = q1.diff(0);
    let w = (t.clone() * t.clone()).scale(-1.0).offset(b2);
    let nf = n as f64;
    let delta = (t.clone() * q.clone()).offset(1.0) + w.clone() * q1.clone();
    let one_sq = (t.clone() * q.clone()).offset(1.0);
    let big_phi = -((q.clone() - t.clone() * q1.clone())
        * (delta.clone().scale(nf) + one_sq.clone()))
        - w.clone() * one_sq * q2.clone();
    let delta1 = delta.diff(0);
    let phi1 = big_phi.diff(0);
    let psi1 = -(t.clone() * big_phi.clone()) / delta.clone()
        + w.clone()
            * (phi1.clone() / delta.clone()
                - (big_phi.clone() * delta1.clone()).scale(1.5) / (delta.clone() * delta.clone()));
    let psi2 = (q.clone() - t.clone() * q1.clone()).scale(2.0 * (nf + 1.0))
        + (big_phi.clone() / delta.clone()).scale(3.0);
    let m = PhiMachinery {
        s,
        b2,
        n,
        phi: f.value(),
        phi1: f1.value(),
        q: q.value(),
        q1: q1.value(),
        q2: q2.value(),
        delta: delta.value(),
        big_phi: big_phi.value(),
        psi1: psi1.value(),
        psi2: psi2.value(),
        psi1_prime: psi1.partial(&[0]),
    };
    if !(m.delta > REGULARITY) {
        return Err(Error::Irregular(format!(
            "Δ = {} at s = {s}, b² = {b2}",
            m.delta
        )));
    }
    Ok(m)
}

impl PhiMachinery {
    /// Closed forms for `φ = 1 + s`.
    pub fn randers(s: f64, b2: f64, n: usize) -> PhiMachinery {
        let n1 = n as f64 + 1.0;
        let p = 1.0 + s;
        PhiMachinery {
            s,
            b2,
            n,
            phi: p,
            phi1: 1.0,
            q: 1.0,
            q1: 0.0,
            q2: 0.0,
            delta: p,
            big_phi: -n1 * p,
            psi1: n1 * (2.0 * s + s * s + b2) / (2.0 * p),
            psi2: -n1,
            psi1_prime: n1 * (2.0 + 2.0 * s - b2 + s * s) / (2.0 * p * p),
        }
    }

    /// Largest relative difference between two evaluations.
    pub fn max_difference(&self, other: &PhiMachinery) -> f64 {
        let pairs = [
            (self.q, other.q),
            (self.q1, other.q1),
            (self.q2, other.q2),
            (self.delta, other.delta),
            (self.big_phi, other.big_phi),
            (self.psi1, other.psi1),
            (self.psi2, other.psi2),
            (self.psi1_prime, other.psi1_prime),
        ];
        pairs
            .iter()
            .map(|(a, b)| (a - b).abs() / (1.0 + a.abs()))
            .fold(0.0, f64::max)
    }
}

/// Evaluates the φ-machinery at `(s, b², n)` by the general formulas; for
/// the Randers profile the closed forms are returned after checking that
/// both agree to 1e-10.
pub fn phi_machinery(phi: &PhiFunction, s: f64, b2: f64, n: usize) -> Result<PhiMachinery> {
    let general = general_series(phi, s, b2, n)?;
    if phi.is_randers() {
        let closed = PhiMachinery::randers(s, b2, n);
        let diff = general.max_difference(&closed);
        if diff > 1e-10 {
            return Err(Error::Inconsistent {
                what: "Randers φ-machinery".into(),
                diff,
            });
        }
        return Ok(closed);
    }
    Ok(general)
}
