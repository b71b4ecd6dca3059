//! Curvature of a Randers metric from `α`-data alone.
//!
//! Writing `G^i = Ḡ^i + H^i` with `H^i = (e_00/(2F) − s_0) y^i + α s^i_0`,
//! the Riemann curvature is
//! `R^i_k = R̄^i_k + 2H^i_{;k} − y^j H^i_{;j·k} + 2H^j H^i_{·j·k} − H^i_{·j} H^j_{·k}`,
//! where `;` is the `α`-covariant derivative with `y` held parallel. Only
//! tensors are involved, so this works verbatim in an orthonormal frame.
//!
//! `H^i_{;k}` is obtained by perturbing the inputs: `b ↦ b + ε_k b_{;k}`,
//! `r ↦ r + ε_k r_{;k}`, `s ↦ s + ε_k s_{;k}` and differentiating in `ε_k`.

use crate::diffcore::{sum, Layout, Scalar, Taylor};
use crate::error::Result;
use crate::riemann::{AlphaData, BetaData};

use super::curvature::DirectionJet;
use super::spray::check_direction;

/// `(H^i, F)` for a Randers metric given `a`, `b`, `r`, `s` and `y`.
pub fn randers_deformation<T: Scalar>(
    a: &[Vec<f64>],
    a_inv: &[Vec<f64>],
    b: &[T],
    r: &[Vec<T>],
    s: &[Vec<T>],
    y: &[T],
) -> (Vec<T>, T) {
    let n = y.len();
    let k = |v: f64| T::from_f64(v);
    let alpha = sum((0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| y[i].clone() * y[j].clone() * k(a[i][j])))
    .sqrt();
    let beta = sum((0..n).map(|i| b[i].clone() * y[i].clone()));
    let f = alpha.clone() + beta.clone();
    let b_up: Vec<T> = (0..n)
        .map(|i| sum((0..n).map(|l| b[l].clone() * k(a_inv[i][l]))))
        .collect();
    let s_low0: Vec<T> = (0..n)
        .map(|l| sum((0..n).map(|j| s[l][j].clone() * y[j].clone())))
        .collect();
    let s0 = sum((0..n).map(|i| b_up[i].clone() * s_low0[i].clone()));
    let r00 = sum((0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| r[i][j].clone() * y[i].clone() * y[j].clone()));
    let e00 = r00 + (beta * s0.clone()).scale(2.0);
    let coef = e00 / f.clone().scale(2.0) - s0;
    let h = (0..n)
        .map(|i| {
            let s_up0 = sum((0..n).map(|l| s_low0[l].clone() * k(a_inv[i][l])));
            coef.clone() * y[i].clone() + alpha.clone() * s_up0
        })
        .collect();
    (h, f)
}

/// `F`, `g` and `R^i_k` as series of order `order` in `y` (variables
/// `0..n`), computed from `α`-data and covariant derivatives of `β`.
pub fn deformation_jet(
    alpha: &AlphaData,
    beta: &BetaData,
    y: &[f64],
    order: usize,
) -> Result<DirectionJet> {
    check_direction(&alpha.point, y)?;
    let n = alpha.n;
    let top = order + 2;
    let layout = Layout::get(2 * n, top);
    let ys: Vec<Taylor> = (0..n)
        .map(|i| Taylor::variable(&layout, top, i, y[i]))
        .collect();
    let eps: Vec<Taylor> = (0..n)
        .map(|k| Taylor::variable(&layout, top, n + k, 0.0))
        .collect();
    let c = Taylor::Const;
    let perturb = |v: f64, d: &[f64]| c(v) + sum((0..n).map(|k| eps[k].clone() * c(d[k])));
    let b: Vec<Taylor> = (0..n).map(|i| perturb(beta.b[i], &beta.b_cov[i])).collect();
    let r: Vec<Vec<Taylor>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| perturb(beta.r[i][j], &beta.r_cov[i][j]))
                .collect()
        })
        .collect();
    let s: Vec<Vec<Taylor>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| perturb(beta.s[i][j], &beta.s_cov[i][j]))
                .collect()
        })
        .collect();
    let (h, f) = randers_deformation(&alpha.a, &alpha.a_inv, &b, &r, &s, &ys);

    let hy: Vec<Vec<Taylor>> = (0..n)
        .map(|i| (0..n).map(|j| h[i].diff(j)).collect())
        .collect();
    let rm = &alpha.riemann;
    let riemann = (0..n)
        .map(|i| {
            (0..n)
                .map(|k| {
                    let bar = sum((0..n)
                        .flat_map(|j| (0..n).map(move |l| (j, l)))
                        .map(|(j, l)| ys[j].clone() * ys[l].clone() * c(rm[i][j][k][l])));
                    let t1 = h[i].diff(n + k).scale(2.0);
                    let t2 = sum((0..n).map(|j| ys[j].clone() * h[i].diff(n + j).diff(k)));
                    let t3 = sum((0..n).map(|j| h[j].clone() * hy[i][j].diff(k))).scale(2.0);
                    let t4 = sum((0..n).map(|j| hy[i][j].clone() * hy[j][k].clone()));
                    (bar + t1 - t2 + t3 - t4).truncate(order)
                })
                .collect()
        })
        .collect();
    let l = f.clone() * f.clone();
    let g = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| l.diff(i).diff(j).scale(0.5).truncate(order))
                .collect()
        })
        .collect();
    Ok(DirectionJet {
        n,
        y: y.to_vec(),
        y_vars: (0..n).collect(),
        ys: ys.iter().map(|v| v.truncate(order + 1)).collect(),
        f: f.truncate(order + 1),
        g,
        r: riemann,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffcore::Backend;
    use crate::finsler::{FinslerMetric, SprayJet};
    use crate::metricdsl::{parse, Expr, MetricSpec};

    fn curved() -> FinslerMetric {
        let a = [
            ["1 + 0.2*x2^2", "0.1*x1*x3", "0.05*sin(x2)"],
            ["0.1*x1*x3", "1 + 0.1*x1^2", "0.1*x3"],
            ["0.05*sin(x2)", "0.1*x3", "exp(0.2*x1)"],
        ];
        let a: Vec<Vec<Expr>> = a
            .iter()
            .map(|r| r.iter().map(|s| parse(s).unwrap()).collect())
            .collect();
        let b = ["0.2*x2*x3", "0.1 + 0.2*x1^2", "0.3*sin(x1*x2)"]
            .iter()
            .map(|s| parse(s).unwrap())
            .collect();
        FinslerMetric::randers(
            MetricSpec::from_parts("curved", a, b, vec![(-1.0, 1.0); 3]).unwrap(),
        )
    }

    #[test]
    fn deformation_matches_coordinate_spray() {
        let m = curved();
        let (x, y) = ([0.3, -0.2, 0.5], [0.4, 1.0, -0.7]);
        let jet = SprayJet::new(&m, &x, &y, 3, Backend::Dual).unwrap();
        let spray = DirectionJet::from_spray(&jet).unwrap();
        let def = deformation_jet(&jet.alpha, &jet.beta, &y, 1).unwrap();
        let (r1, r2) = (spray.riemann(), def.riemann());
        for i in 0..3 {
            for k in 0..3 {
                assert!(
                    (r1[i][k] - r2[i][k]).abs() < 1e-11,
                    "R[{i}][{k}]: {} vs {}",
                    r1[i][k],
                    r2[i][k]
                );
                let (d1, d2) = (spray.r[i][k].partial(&[3 + k]), def.r[i][k].partial(&[k]));
                assert!((d1 - d2).abs() < 1e-10);
            }
        }
        let us = spray.sample_flags(5, 7);
        let (k1, k2) = (
            spray.flag_gradient(&us).unwrap(),
            def.flag_gradient(&us).unwrap(),
        );
        for i in 0..3 {
            assert!((k1[i] - k2[i]).abs() < 1e-10);
        }
    }
}
