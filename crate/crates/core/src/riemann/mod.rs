//! Riemannian data of `α`, the tensors derived from `β`, and identities
//! relating them.

mod alpha;
mod beta;
mod contractions;

pub use alpha::{alpha_at, alpha_at_with, AlphaData, ComponentJet};
pub use beta::{
    beta_at, beta_from_components, killing_residual, point_data, BetaData, CovariantInput, Ring,
};
pub use contractions::{contract_with_y, DirectionalContractions};

use crate::error::Result;
use crate::metricdsl::MetricSpec;

/// Both sides of `s^i_{0;i} = Ric_α(y, b^♯) + r^i_{i;0} − r^i_{0;i}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DivergenceSides {
    pub lhs: f64,
    pub rhs: f64,
}

impl DivergenceSides {
    pub fn residual(&self) -> f64 {
        (self.lhs - self.rhs).abs() / (1.0 + self.lhs.abs() + self.rhs.abs())
    }
}

/// Evaluates the divergence identity for `s` at one direction. The left side
/// is the divergence covector `D`; the right side comes from the curvature of
/// `α` and the symmetric part `r`.
pub fn divergence_sides(alpha: &AlphaData, beta: &BetaData, y: &[f64]) -> DivergenceSides {
    let n = alpha.n;
    let lhs: f64 = (0..n).map(|k| beta.div[k] * y[k]).sum();
    let ric = alpha.ricci_form(y, &beta.b_up);
    let mut trace_along = 0.0;
    let mut div_r = 0.0;
    for i in 0..n {
        for l in 0..n {
            for k in 0..n {
                // r^i_{i;k} y^k and r^i_{j;i} y^j with r^i_{j;k} = a^il r_{lj;k}
                trace_along += alpha.a_inv[i][l] * beta.r_cov[l][i][k] * y[k];
                div_r += alpha.a_inv[i][l] * beta.r_cov[l][k][i] * y[k];
            }
        }
    }
    DivergenceSides {
        lhs,
        rhs: ric + trace_along - div_r,
    }
}

pub fn divergence_residual(spec: &MetricSpec, x: &[f64], y: &[f64]) -> Result<f64> {
    let (alpha, beta) = point_data(spec, x, crate::diffcore::Backend::Dual)?;
    Ok(divergence_sides(&alpha, &beta, y).residual())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metricdsl::{parse, Expr};

    fn spec(a: &[&[&str]], b: &[&str], half: f64) -> MetricSpec {
        let n = b.len();
        let a: Vec<Vec<Expr>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| parse(a[i.min(j)][i.max(j) - i.min(j)]).unwrap())
                    .collect()
            })
            .collect();
        MetricSpec::from_parts(
            "t",
            a,
            b.iter().map(|s| parse(s).unwrap()).collect(),
            vec![(-half, half); n],
        )
        .unwrap()
    }

    #[test]
    fn rotational_killing_form() {
        let q = 0.3;
        let s = spec(
            &[&["1", "0", "0"], &["1", "0"], &["1"]],
            &["-0.3*x2", "0.3*x1", "0"],
            1.5,
        );
        let x = [0.4, -0.7, 0.2];
        let (alpha, beta) = point_data(&s, &x, crate::diffcore::Backend::Dual).unwrap();
        assert_eq!(beta.max_r(), 0.0);
        assert!((beta.s[0][1] + q).abs() < 1e-15);
        assert!((beta.s[1][0] - q).abs() < 1e-15);
        let y = [0.3, 1.1, -0.4];
        let c = contract_with_y(&beta, &alpha, &y).unwrap();
        assert!((c.t00 + q * q * (y[0] * y[0] + y[1] * y[1])).abs() < 1e-15);
        assert!(divergence_sides(&alpha, &beta, &y).residual() < 1e-15);
    }

    #[test]
    fn divergence_identity_on_curved_metric() {
        let s = spec(
            &[
                &["1 + 0.2*x2^2", "0.1*x1*x3", "0.05*sin(x2)"],
                &["1 + 0.1*x1^2", "0.1*x3"],
                &["exp(0.2*x1)"],
            ],
            &["0.2*x2*x3", "0.1 + 0.2*x1^2", "0.3*sin(x1*x2)"],
            1.0,
        );
        let x = [0.3, -0.2, 0.5];
        let (alpha, beta) = point_data(&s, &x, crate::diffcore::Backend::Dual).unwrap();
        assert!(alpha.bianchi_residual() < 1e-12);
        assert!(beta.ricci_identity_residual(&alpha) < 1e-12);
        for y in [[1.0, 0.0, 0.0], [0.2, -0.7, 1.3]] {
            let p = divergence_sides(&alpha, &beta, &y);
            assert!(p.residual() < 1e-12, "{p:?}");
        }
    }

    #[test]
    fn short_direction_is_rejected() {
        let s = spec(&[&["1", "0"], &["1"]], &["0.1", "0"], 1.0);
        let (alpha, beta) = point_data(&s, &[0.0, 0.0], crate::diffcore::Backend::Dual).unwrap();
        assert!(contract_with_y(&beta, &alpha, &[1e-10, 0.0]).is_err());
    }
}
