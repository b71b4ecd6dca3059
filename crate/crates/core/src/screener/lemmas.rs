//! Both sides of the three scalar identities a Killing-form Randers metric
//! of scalar flag curvature `K` satisfies along a direction `y`.

use serde::Serialize;

use super::fits::check_killing;
use crate::error::{Error, Result};
use crate::finsler::DirectionJet;
use crate::riemann::{contract_with_y, AlphaData, BetaData};

/// Flag-variance ceiling below which the metric counts as scalar-flag at `(x, y)`.
pub const SCALAR_FLAG_THRESHOLD: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sides {
    pub lhs: f64,
    pub rhs: f64,
    /// `|lhs − rhs| / (1 + |lhs| + |rhs|)`
    pub residual: f64,
}

impl Sides {
    fn new(lhs: f64, rhs: f64) -> Sides {
        Sides {
            lhs,
            rhs,
            residual: (lhs - rhs).abs() / (1.0 + lhs.abs() + rhs.abs()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LemmaResiduals {
    pub k: f64,
    pub flag_variance: f64,
    /// `K_{·i} b^i`
    pub k_dot_b: f64,
    pub kappa: f64,
    /// `Ric` expanded through `κ`, `s^m_{0;m}`, `t_00` and the `Ξ`-term.
    pub ricci_expansion: Sides,
    /// Antisymmetric part, carrying `ρ_{0;i} − ρ_{i;0}`.
    pub antisymmetric: Sides,
    /// Symmetric part, carrying `t_00`, `t_0` and `K` itself.
    pub symmetric: Sides,
}

impl LemmaResiduals {
    pub fn max_residual(&self) -> f64 {
        self.ricci_expansion
            .residual
            .max(self.antisymmetric.residual)
            .max(self.symmetric.residual)
    }
}

/// Evaluates the three identities at the direction of `jet`, which must
/// carry `R^i_k` to first order in `y`. `K` is the mean over `flags` seeded
/// flags; the directional data is taken at `y / α(y)`.
pub fn lemma_residuals(
    alpha: &AlphaData,
    beta: &BetaData,
    kappa: f64,
    jet: &DirectionJet,
    flags: usize,
    seed: u64,
) -> Result<LemmaResiduals> {
    check_killing(beta)?;
    let stats = jet.scalar_flag_stats(flags, seed)?;
    if !(stats.variance < SCALAR_FLAG_THRESHOLD) {
        return Err(Error::NotApplicable(format!(
            "flag curvature varies with the flag (variance {:e})",
            stats.variance
        )));
    }
    let n = alpha.n;
    let scale = alpha.norm(&jet.y);
    let gradient = jet.flag_gradient(&jet.sample_flags(flags, seed))?;
    // K_{·i} has degree −1 in y.
    let k_dot_b: f64 = gradient
        .iter()
        .zip(&beta.b_up)
        .map(|(g, b)| g * b)
        .sum::<f64>()
        * scale;
    let y: Vec<f64> = jet.y.iter().map(|v| v / scale).collect();
    let c = contract_with_y(beta, alpha, &y)?;

    let k = stats.mean;
    let nf = n as f64;
    let (a, s, b2) = (c.alpha, c.s, beta.b2);
    let f = a + c.beta;
    let (s0, t0, t00, s00) = (c.s0, c.t0, c.t00, c.s00_cov);
    let a2 = a * a;
    let tb: f64 = beta.t_vec.iter().zip(&beta.b_up).map(|(t, b)| t * b).sum();
    // b^i y^j (s_{j;i} − s_{i;j})
    let mut bs = 0.0;
    for i in 0..n {
        for j in 0..n {
            bs += beta.b_up[i] * y[j] * (beta.s_vec_cov[j][i] - beta.s_vec_cov[i][j]);
        }
    }
    // ρ_{i;j} = −s_{i;j}/(1 − b²) − 2 s_i s_j/(1 − b²)²; the second term is symmetric.
    let b_rho = -bs / (1.0 - b2);

    let xi = -2.0 * a2 * t0 / f + 3.0 * a2 * s0 * s0 / (f * f) + a * s00 / f;
    let ricci_expansion = Sides::new(
        2.0 * a * c.div0 + (nf - 1.0) * (kappa * a2 + t00 + xi),
        (nf - 1.0) * k * f * f,
    );

    let p = 1.0 + s;
    let rhs = -(nf + 1.0) / 3.0 * a2 * p * p * k_dot_b;
    let antisymmetric = Sides::new(
        (nf + 1.0)
            * ((s00 * (b2 - s * s) / (p * p)
                + 2.0 * s0 * s0 * (1.0 + 3.0 * s + 2.0 * b2) / p.powi(3))
                / a
                + b_rho
                + 2.0 * t0 * (s * s - b2) / (p * p)
                + bs / p),
        rhs,
    );
    let symmetric = Sides::new(
        (nf + 1.0)
            * ((s00 * (1.0 + 3.0 * s + b2 + s * s) / (2.0 * p * p)
                + t00 * p / 2.0
                + s0 * s0 * (1.0 + 6.0 * s + 5.0 * b2) / (2.0 * p.powi(3)))
                / a
                - t0 * (s + b2) / (p * p)
                + a * tb / (2.0 * p)
                + a * p * (b2 - s * s) * k / 2.0),
        rhs,
    );
    Ok(LemmaResiduals {
        k,
        flag_variance: stats.variance,
        k_dot_b,
        kappa,
        ricci_expansion,
        antisymmetric,
        symmetric,
    })
}
