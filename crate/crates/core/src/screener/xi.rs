//! The polynomial system `Ξ₃α³ + Ξ₂α² + Ξ₁α + Ξ₀ = 0` of a Killing-form
//! Randers metric of scalar flag curvature.

use serde::Serialize;

use super::fits::{check_killing, inner1, inner2, inner3};
use crate::diffcore::linalg::Matrix;
use crate::error::Result;
use crate::riemann::{AlphaData, BetaData};

/// Symmetric coefficient tensors of `Ξ₀` (cubic), `Ξ₁` (quadratic), `Ξ₂`
/// (linear) and `Ξ₃` (constant) in `y`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct XiCoefficients {
    pub kappa: f64,
    /// Flattened rank-3 tensor.
    pub xi0: Vec<f64>,
    pub xi1: Matrix<f64>,
    pub xi2: Vec<f64>,
    pub xi3: f64,
    /// `‖Ξ₂α² + Ξ₀‖`
    pub residual_cubic: f64,
    /// `‖Ξ₃α² + Ξ₁‖`
    pub residual_quadratic: f64,
}

fn symmetrize3(n: usize, f: impl Fn(usize, usize, usize) -> f64) -> Vec<f64> {
    let mut out = vec![0.0; n * n * n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                out[(i * n + j) * n + k] =
                    (f(i, j, k) + f(i, k, j) + f(j, i, k) + f(j, k, i) + f(k, i, j) + f(k, j, i))
                        / 6.0;
            }
        }
    }
    out
}

/// Assembles the `Ξ` coefficients from `α`- and `β`-data and the fitted `κ`,
/// using `s_{i;j} = s_{j;i}` for Killing forms.
pub fn xi_decomposition(alpha: &AlphaData, beta: &BetaData, kappa: f64) -> Result<XiCoefficients> {
    check_killing(beta)?;
    let n = beta.n;
    let n1 = n as f64 - 1.0;
    let (b, b2) = (&beta.b, beta.b2);
    let d = &beta.div;
    let sym_s = |i: usize, j: usize| 0.5 * (beta.s_vec_cov[i][j] + beta.s_vec_cov[j][i]);
    let xi3 = kappa * b2 + inner1(&alpha.a_inv, &beta.t_vec, b);
    let xi2: Vec<f64> = d.iter().map(|v| 2.0 * b2 * v / n1).collect();
    let xi1: Matrix<f64> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    -kappa * b[i] * b[j] - (beta.t_vec[i] * b[j] + beta.t_vec[j] * b[i])
                        + beta.t[i][j] * (1.0 + b2)
                        - 3.0 * beta.s_vec[i] * beta.s_vec[j]
                        + sym_s(i, j)
                })
                .collect()
        })
        .collect();
    let xi0 = symmetrize3(n, |i, j, k| {
        2.0 * b[i] * (sym_s(j, k) + beta.t[j][k] - b[j] * d[k] / n1)
    });
    let cubic: Vec<f64> = {
        let xi2a = symmetrize3(n, |i, j, k| xi2[i] * alpha.a[j][k]);
        xi2a.iter().zip(&xi0).map(|(p, q)| p + q).collect()
    };
    let quadratic: Matrix<f64> = (0..n)
        .map(|i| (0..n).map(|j| xi3 * alpha.a[i][j] + xi1[i][j]).collect())
        .collect();
    Ok(XiCoefficients {
        kappa,
        residual_cubic: inner3(&alpha.a_inv, &cubic, &cubic).max(0.0).sqrt(),
        residual_quadratic: inner2(&alpha.a_inv, &quadratic, &quadratic).max(0.0).sqrt(),
        xi0,
        xi1,
        xi2,
        xi3,
    })
}
