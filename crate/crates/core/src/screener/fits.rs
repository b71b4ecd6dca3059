//! Least-squares fits of the scalar functions `c`, `λ` and `κ`.
//!
//! Polynomial identities in `y` are compared through their coefficient
//! tensors, with the `α`-invariant inner product
//! `⟨A, B⟩ = a^{ik} a^{jl} A_ij B_kl` (and its analogues in other ranks).

use serde::Serialize;

use crate::diffcore::linalg::Matrix;
use crate::error::{Error, Result};
use crate::riemann::{AlphaData, BetaData};

/// Killing tolerance of the screener's preconditions.
pub const KILLING_THRESHOLD: f64 = 1e-8;
/// `b²` below this makes `b⁻²` meaningless.
pub const B2_THRESHOLD: f64 = 1e-10;

/// A fitted scalar with the normalised defect it leaves behind.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionFit {
    pub value: f64,
    pub residual: f64,
    /// Coefficients of the defect, flattened row-major.
    pub witness: Vec<f64>,
}

pub(crate) fn inner1(a_inv: &Matrix<f64>, u: &[f64], v: &[f64]) -> f64 {
    let n = u.len();
    (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| a_inv[i][j] * u[i] * v[j])
        .sum()
}

pub(crate) fn inner2(a_inv: &Matrix<f64>, p: &Matrix<f64>, q: &Matrix<f64>) -> f64 {
    let n = p.len();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    s += a_inv[i][k] * a_inv[j][l] * p[i][j] * q[k][l];
                }
            }
        }
    }
    s
}

/// Flattened rank-3 tensors, index `(i·n + j)·n + k`.
pub(crate) fn inner3(a_inv: &Matrix<f64>, p: &[f64], q: &[f64]) -> f64 {
    let n = a_inv.len();
    let at = |t: &[f64], i: usize, j: usize, k: usize| t[(i * n + j) * n + k];
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let mut v = 0.0;
                for l in 0..n {
                    for m in 0..n {
                        for r in 0..n {
                            v += a_inv[i][l] * a_inv[j][m] * a_inv[k][r] * at(q, l, m, r);
                        }
                    }
                }
                s += at(p, i, j, k) * v;
            }
        }
    }
    s
}

pub(crate) fn norm1(a_inv: &Matrix<f64>, u: &[f64]) -> f64 {
    inner1(a_inv, u, u).max(0.0).sqrt()
}

pub(crate) fn norm2(a_inv: &Matrix<f64>, p: &Matrix<f64>) -> f64 {
    inner2(a_inv, p, p).max(0.0).sqrt()
}

pub fn check_killing(beta: &BetaData) -> Result<()> {
    let defect = beta.killing_defect();
    if !(defect < KILLING_THRESHOLD) {
        return Err(Error::NotApplicable(format!(
            "beta is not Killing (defect {defect:e})"
        )));
    }
    Ok(())
}

/// Refuses non-Killing `β` and `b ≈ 0`.
pub fn check_preconditions(beta: &BetaData) -> Result<()> {
    check_killing(beta)?;
    if !(beta.b2 > B2_THRESHOLD) {
        return Err(Error::NotApplicable(format!(
            "b² = {:e} vanishes here",
            beta.b2
        )));
    }
    Ok(())
}

/// `T_ij = t_ij + ½(s_{i;j} + s_{j;i})`, the coefficient matrix of `t_00 + s_{0;0}`.
pub fn t_matrix(beta: &BetaData) -> Matrix<f64> {
    let n = beta.n;
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| beta.t[i][j] + 0.5 * (beta.s_vec_cov[i][j] + beta.s_vec_cov[j][i]))
                .collect()
        })
        .collect()
}

/// `t_00 + s_{0;0} = c (α² − b⁻²β²)`: `c = ⟨T, M⟩/⟨M, M⟩` with
/// `M_ij = a_ij − b_i b_j / b²`, residual `‖T − cM‖ / ‖M‖`.
pub fn fit_c(alpha: &AlphaData, beta: &BetaData) -> Result<ConditionFit> {
    check_preconditions(beta)?;
    let n = beta.n;
    let t = t_matrix(beta);
    let m: Matrix<f64> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| alpha.a[i][j] - beta.b[i] * beta.b[j] / beta.b2)
                .collect()
        })
        .collect();
    let mm = inner2(&alpha.a_inv, &m, &m);
    let c = inner2(&alpha.a_inv, &t, &m) / mm;
    let defect: Matrix<f64> = (0..n)
        .map(|i| (0..n).map(|j| t[i][j] - c * m[i][j]).collect())
        .collect();
    Ok(ConditionFit {
        value: c,
        residual: norm2(&alpha.a_inv, &defect) / mm.sqrt(),
        witness: defect.into_iter().flatten().collect(),
    })
}

/// `s^m_{k;m} = −(n−1) b⁻² c b_k`: returns `‖D + (n−1)b⁻²c b‖ / (1 + ‖D‖)`.
pub fn check_divergence(alpha: &AlphaData, beta: &BetaData, c: f64) -> Result<f64> {
    check_preconditions(beta)?;
    let k = (beta.n as f64 - 1.0) * c / beta.b2;
    let defect: Vec<f64> = (0..beta.n).map(|i| beta.div[i] + k * beta.b[i]).collect();
    Ok(norm1(&alpha.a_inv, &defect) / (1.0 + norm1(&alpha.a_inv, &beta.div)))
}

/// `t_k = −(n−1)/(n+1) (λ + c b⁻²) b_k`, fitted through `μ = ⟨t, b⟩/b²`.
/// The residual is `‖t − μ b‖ / (‖s‖² ‖b‖)`, which lies in `[0, 1]` because
/// `t_k = b^i s_im s^m_k`.
pub fn fit_lambda(alpha: &AlphaData, beta: &BetaData, c: f64) -> Result<ConditionFit> {
    check_preconditions(beta)?;
    let n = beta.n as f64;
    let mu = inner1(&alpha.a_inv, &beta.t_vec, &beta.b) / beta.b2;
    let defect: Vec<f64> = (0..beta.n)
        .map(|i| beta.t_vec[i] - mu * beta.b[i])
        .collect();
    let s2 = inner2(&alpha.a_inv, &beta.s, &beta.s);
    let scale = s2 * beta.b2.sqrt();
    Ok(ConditionFit {
        value: -(n + 1.0) / (n - 1.0) * mu - c / beta.b2,
        residual: if scale > 0.0 {
            norm1(&alpha.a_inv, &defect) / scale
        } else {
            0.0
        },
        witness: defect,
    })
}

/// `Ric_α ij = (n−1) λ a_ij + (n+1) t_ij`; residual normalised by
/// `‖Ric_α‖ + ‖a‖`.
pub fn alpha_ricci_fit(alpha: &AlphaData, beta: &BetaData) -> ConditionFit {
    let n = alpha.n;
    let nf = n as f64;
    let e: Matrix<f64> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| 0.5 * (alpha.ricci[i][j] + alpha.ricci[j][i]) - (nf + 1.0) * beta.t[i][j])
                .collect()
        })
        .collect();
    let aa = inner2(&alpha.a_inv, &alpha.a, &alpha.a);
    let lambda = inner2(&alpha.a_inv, &e, &alpha.a) / ((nf - 1.0) * aa);
    let defect: Matrix<f64> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| e[i][j] - (nf - 1.0) * lambda * alpha.a[i][j])
                .collect()
        })
        .collect();
    let scale = norm2(&alpha.a_inv, &alpha.ricci) + aa.sqrt();
    ConditionFit {
        value: lambda,
        residual: norm2(&alpha.a_inv, &defect) / scale,
        witness: defect.into_iter().flatten().collect(),
    }
}

/// The part of `Ric` that `κ` has to absorb:
/// `Ric − 2α s^m_{0;m} − (n−1)(t_00 + Ξ)` with
/// `Ξ = −2α² t_0/F + 3α² s_0²/F² + α s_{0;0}/F`.
pub fn kappa_target(
    alpha: &AlphaData,
    beta: &BetaData,
    y: &[f64],
    ricci: f64,
) -> Result<(f64, f64)> {
    let c = crate::riemann::contract_with_y(beta, alpha, y)?;
    let f = c.alpha + c.beta;
    let a2 = c.alpha * c.alpha;
    let xi = -2.0 * a2 * c.t0 / f + 3.0 * a2 * c.s0 * c.s0 / (f * f) + c.alpha * c.s00_cov / f;
    let n1 = alpha.n as f64 - 1.0;
    Ok((ricci - 2.0 * c.alpha * c.div0 - n1 * (c.t00 + xi), n1 * a2))
}

/// `Ric = 2α s^m_{0;m} + (n−1)(κα² + t_00 + Ξ)` fitted over directions
/// `ys` with Finsler Ricci curvatures `ricci`. The residual is the RMS
/// defect over `1 + RMS(Ric)`, with each `y` scaled to `α(y) = 1`.
pub fn ricci_33_fit(
    alpha: &AlphaData,
    beta: &BetaData,
    ys: &[Vec<f64>],
    ricci: &[f64],
) -> Result<ConditionFit> {
    check_killing(beta)?;
    if ys.is_empty() || ys.len() != ricci.len() {
        return Err(Error::InvalidParameter(
            "κ fit needs one Ricci value per direction".into(),
        ));
    }
    let mut rows = Vec::with_capacity(ys.len());
    for (y, &ric) in ys.iter().zip(ricci) {
        let a = alpha.norm(y);
        let yn: Vec<f64> = y.iter().map(|v| v / a).collect();
        rows.push((
            kappa_target(alpha, beta, &yn, ric / (a * a))?,
            ric / (a * a),
        ));
    }
    let num: f64 = rows.iter().map(|((d, w), _)| d * w).sum();
    let den: f64 = rows.iter().map(|((_, w), _)| w * w).sum();
    let kappa = num / den;
    let defect: Vec<f64> = rows.iter().map(|((d, w), _)| d - kappa * w).collect();
    let m = rows.len() as f64;
    let rms = |v: &mut dyn Iterator<Item = f64>| (v.map(|x| x * x).sum::<f64>() / m).sqrt();
    let residual =
        rms(&mut defect.iter().copied()) / (1.0 + rms(&mut rows.iter().map(|(_, r)| *r)));
    Ok(ConditionFit {
        value: kappa,
        residual,
        witness: defect,
    })
}
