use std::ops::{Add, Mul, Neg, Sub};

use serde::Serialize;

use super::alpha::{AlphaData, ComponentJet};
use crate::diffcore::Backend;
use crate::error::Result;
use crate::metricdsl::MetricSpec;

/// Exact or floating coefficients the covariant pipeline can run over.
pub trait Ring:
    Clone
    + PartialEq
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    fn zero() -> Self;
    fn from_ratio(num: i64, den: i64) -> Self;
}

impl Ring for f64 {
    fn zero() -> Self {
        0.0
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }
}

/// Inputs of the covariant pipeline: metric inverse, connection table and
/// the frame/coordinate derivatives of `b`.
pub struct CovariantInput<R> {
    pub a_inv: Vec<Vec<R>>,
    /// `conn[s][i][j]`, see [`AlphaData`].
    pub conn: Vec<Vec<Vec<R>>>,
    /// `d_conn[s][i][j][k] = e_k(conn[s][i][j])`.
    pub d_conn: Vec<Vec<Vec<Vec<R>>>>,
    pub b: Vec<R>,
    /// `db[i][j] = e_j(b_i)`.
    pub db: Vec<Vec<R>>,
    /// `ddb[i][j][k] = e_k(e_j(b_i))`.
    pub ddb: Vec<Vec<Vec<R>>>,
}

/// Every tensor built from `β` and its first two covariant derivatives.
///
/// Index conventions: `b_cov[i][j] = b_{i;j}`, `b_cov2[i][j][k] = b_{i;j;k}`,
/// `s_up[i][j] = s^i_j`, `s_cov[i][j][k] = s_{ij;k}`,
/// `s_vec_cov[j][k] = s_{j;k}`, `div[k] = D_k = s^m_{k;m}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BetaData<R = f64> {
    pub n: usize,
    pub b: Vec<R>,
    pub b_up: Vec<R>,
    pub b2: R,
    pub b_cov: Vec<Vec<R>>,
    pub b_cov2: Vec<Vec<Vec<R>>>,
    pub r: Vec<Vec<R>>,
    pub s: Vec<Vec<R>>,
    pub r_up: Vec<Vec<R>>,
    pub s_up: Vec<Vec<R>>,
    pub r_vec: Vec<R>,
    pub s_vec: Vec<R>,
    pub q: Vec<Vec<R>>,
    pub t: Vec<Vec<R>>,
    pub q_vec: Vec<R>,
    pub t_vec: Vec<R>,
    pub r_cov: Vec<Vec<Vec<R>>>,
    pub s_cov: Vec<Vec<Vec<R>>>,
    pub s_vec_cov: Vec<Vec<R>>,
    pub div: Vec<R>,
}

fn sum<R: Ring>(it: impl Iterator<Item = R>) -> R {
    it.fold(R::zero(), |a, b| a + b)
}

fn grid2<R: Ring>(n: usize, f: impl Fn(usize, usize) -> R) -> Vec<Vec<R>> {
    (0..n).map(|i| (0..n).map(|j| f(i, j)).collect()).collect()
}

fn grid3<R: Ring>(n: usize, f: impl Fn(usize, usize, usize) -> R) -> Vec<Vec<Vec<R>>> {
    (0..n).map(|i| grid2(n, |j, k| f(i, j, k))).collect()
}

impl<R: Ring> BetaData<R> {
    pub fn compute(inp: &CovariantInput<R>) -> BetaData<R> {
        let n = inp.b.len();
        let half = R::from_ratio(1, 2);
        let (g, dg) = (&inp.conn, &inp.d_conn);
        let b = &inp.b;
        let b_up: Vec<R> = (0..n)
            .map(|i| sum((0..n).map(|j| inp.a_inv[i][j].clone() * b[j].clone())))
            .collect();
        let b2 = sum((0..n).map(|i| b[i].clone() * b_up[i].clone()));

        let b_cov = grid2(n, |i, j| {
            inp.db[i][j].clone() - sum((0..n).map(|s| b[s].clone() * g[s][i][j].clone()))
        });
        // e_k(b_{i;j})
        let e_b_cov = grid3(n, |i, j, k| {
            inp.ddb[i][j][k].clone()
                - sum((0..n).map(|s| {
                    inp.db[s][k].clone() * g[s][i][j].clone()
                        + b[s].clone() * dg[s][i][j][k].clone()
                }))
        });
        let b_cov2 = grid3(n, |i, j, k| {
            e_b_cov[i][j][k].clone()
                - sum((0..n).map(|s| {
                    b_cov[s][j].clone() * g[s][i][k].clone()
                        + b_cov[i][s].clone() * g[s][j][k].clone()
                }))
        });

        let r = grid2(n, |i, j| {
            half.clone() * (b_cov[i][j].clone() + b_cov[j][i].clone())
        });
        let s = grid2(n, |i, j| {
            half.clone() * (b_cov[i][j].clone() - b_cov[j][i].clone())
        });
        let raise = |m: &Vec<Vec<R>>| {
            grid2(n, |i, j| {
                sum((0..n).map(|k| inp.a_inv[i][k].clone() * m[k][j].clone()))
            })
        };
        let r_up = raise(&r);
        let s_up = raise(&s);
        let contract_b = |m: &Vec<Vec<R>>| -> Vec<R> {
            (0..n)
                .map(|j| sum((0..n).map(|i| b_up[i].clone() * m[i][j].clone())))
                .collect()
        };
        let r_vec = contract_b(&r);
        let s_vec = contract_b(&s);
        let q = grid2(n, |i, j| {
            sum((0..n).map(|m| r[i][m].clone() * s_up[m][j].clone()))
        });
        let t = grid2(n, |i, j| {
            sum((0..n).map(|m| s[i][m].clone() * s_up[m][j].clone()))
        });
        let q_vec = contract_b(&q);
        let t_vec = contract_b(&t);

        let r_cov = grid3(n, |i, j, k| {
            half.clone() * (b_cov2[i][j][k].clone() + b_cov2[j][i][k].clone())
        });
        let s_cov = grid3(n, |i, j, k| {
            half.clone() * (b_cov2[i][j][k].clone() - b_cov2[j][i][k].clone())
        });
        // b^i_{;k} = a^il b_{l;k}
        let b_up_cov = raise(&b_cov);
        let s_vec_cov = grid2(n, |j, k| {
            sum((0..n).map(|i| {
                b_up_cov[i][k].clone() * s[i][j].clone() + b_up[i].clone() * s_cov[i][j][k].clone()
            }))
        });
        let div = (0..n)
            .map(|k| {
                sum((0..n).flat_map(|m| {
                    let s_cov = &s_cov;
                    (0..n).map(move |l| inp.a_inv[m][l].clone() * s_cov[l][k][m].clone())
                }))
            })
            .collect();

        BetaData {
            n,
            b: b.clone(),
            b_up,
            b2,
            b_cov,
            b_cov2,
            r,
            s,
            r_up,
            s_up,
            r_vec,
            s_vec,
            q,
            t,
            q_vec,
            t_vec,
            r_cov,
            s_cov,
            s_vec_cov,
            div,
        }
    }

    pub fn map<S>(&self, f: impl Fn(&R) -> S + Copy) -> BetaData<S> {
        let m1 = |v: &Vec<R>| v.iter().map(f).collect::<Vec<S>>();
        let m2 = |v: &Vec<Vec<R>>| v.iter().map(m1).collect::<Vec<_>>();
        let m3 = |v: &Vec<Vec<Vec<R>>>| v.iter().map(m2).collect::<Vec<_>>();
        BetaData {
            n: self.n,
            b: m1(&self.b),
            b_up: m1(&self.b_up),
            b2: f(&self.b2),
            b_cov: m2(&self.b_cov),
            b_cov2: m3(&self.b_cov2),
            r: m2(&self.r),
            s: m2(&self.s),
            r_up: m2(&self.r_up),
            s_up: m2(&self.s_up),
            r_vec: m1(&self.r_vec),
            s_vec: m1(&self.s_vec),
            q: m2(&self.q),
            t: m2(&self.t),
            q_vec: m1(&self.q_vec),
            t_vec: m1(&self.t_vec),
            r_cov: m3(&self.r_cov),
            s_cov: m3(&self.s_cov),
            s_vec_cov: m2(&self.s_vec_cov),
            div: m1(&self.div),
        }
    }
}

impl BetaData<f64> {
    /// `max |r_ij|`.
    pub fn max_r(&self) -> f64 {
        self.r.iter().flatten().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Killing defect normalised by the size of `∇β`.
    pub fn killing_defect(&self) -> f64 {
        let scale = self
            .b_cov
            .iter()
            .flatten()
            .fold(0.0f64, |m, v| m.max(v.abs()));
        self.max_r() / (1.0 + scale)
    }

    /// `b_{i;j;k} − b_{i;k;j} − R^m_ijk b_m`, largest entry.
    pub fn ricci_identity_residual(&self, alpha: &AlphaData) -> f64 {
        let n = self.n;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let lhs = self.b_cov2[i][j][k] - self.b_cov2[i][k][j];
                    let rhs: f64 = (0..n).map(|m| alpha.riemann[m][i][j][k] * self.b[m]).sum();
                    worst = worst.max((lhs - rhs).abs());
                }
            }
        }
        worst
    }

    /// `max |s_{i;j} − s_{j;i}|`.
    pub fn s_vec_cov_asymmetry(&self) -> f64 {
        let n = self.n;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                worst = worst.max((self.s_vec_cov[i][j] - self.s_vec_cov[j][i]).abs());
            }
        }
        worst
    }
}

pub fn beta_from_components(alpha: &AlphaData, c: &ComponentJet) -> BetaData {
    BetaData::compute(&CovariantInput {
        a_inv: alpha.a_inv.clone(),
        conn: alpha.conn.clone(),
        d_conn: alpha.d_conn.clone(),
        b: c.b.clone(),
        db: c.db.clone(),
        ddb: c.ddb.clone(),
    })
}

/// β-derived tensors of the metric at `x` (re-evaluates the component jet).
pub fn beta_at(spec: &MetricSpec, x: &[f64], alpha: &AlphaData) -> Result<BetaData> {
    let c = ComponentJet::evaluate(spec, x, Backend::Dual)?;
    Ok(beta_from_components(alpha, &c))
}

/// `α` and `β` data from a single component jet.
pub fn point_data(spec: &MetricSpec, x: &[f64], backend: Backend) -> Result<(AlphaData, BetaData)> {
    let c = ComponentJet::evaluate(spec, x, backend)?;
    let alpha = AlphaData::from_components(x, &c)?;
    let beta = beta_from_components(&alpha, &c);
    Ok((alpha, beta))
}

/// Largest normalised Killing defect over a set of points.
pub fn killing_residual(spec: &MetricSpec, points: &[Vec<f64>]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for x in points {
        let (_, beta) = point_data(spec, x, Backend::Dual)?;
        worst = worst.max(beta.killing_defect());
    }
    Ok(worst)
}
