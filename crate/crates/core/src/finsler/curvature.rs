use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::diffcore::linalg::{self, Matrix};
use crate::diffcore::{sum, Backend, Scalar, Taylor};
use crate::error::{Error, Result};

use super::spray::{FinslerMetric, SprayJet};

/// `F`, `g_ij` and `R^i_k` as Taylor series in the direction `y`, from any
/// source able to produce them (coordinate spray or frame deformation).
#[derive(Debug, Clone)]
pub struct DirectionJet {
    pub n: usize,
    pub y: Vec<f64>,
    /// Series variable carrying `y^i`.
    pub y_vars: Vec<usize>,
    pub ys: Vec<Taylor>,
    pub f: Taylor,
    pub g: Vec<Vec<Taylor>>,
    pub r: Vec<Vec<Taylor>>,
}

impl DirectionJet {
    pub fn from_spray(jet: &SprayJet) -> Result<DirectionJet> {
        let n = jet.n;
        Ok(DirectionJet {
            n,
            y: jet.y.clone(),
            y_vars: (n..2 * n).collect(),
            ys: (0..n).map(|i| jet.y_var(i).clone()).collect(),
            f: jet.f_series().clone(),
            g: jet.g_series().to_vec(),
            r: jet.riemann_series()?,
        })
    }

    pub fn f(&self) -> f64 {
        self.f.value()
    }

    pub fn f_y(&self) -> Vec<f64> {
        self.y_vars.iter().map(|&v| self.f.partial(&[v])).collect()
    }

    pub fn g(&self) -> Matrix<f64> {
        linalg::to_f64(&self.g)
    }

    pub fn riemann(&self) -> Matrix<f64> {
        linalg::to_f64(&self.r)
    }

    pub fn ricci(&self) -> f64 {
        (0..self.n).map(|m| self.r[m][m].value()).sum()
    }

    /// `F² δ^i_k − F F_{y^k} y^i`.
    pub fn constant_curvature_form(&self) -> Matrix<f64> {
        let (f, fy) = (self.f(), self.f_y());
        (0..self.n)
            .map(|i| {
                (0..self.n)
                    .map(|k| if i == k { f * f } else { 0.0 } - f * fy[k] * self.y[i])
                    .collect()
            })
            .collect()
    }

    /// Flag curvature of the flag spanned by `y` and `u`.
    pub fn flag_curvature(&self, u: &[f64]) -> Result<f64> {
        let g = self.g();
        let r = self.riemann();
        let ru = linalg::mat_vec(&r, u);
        let gyy = linalg::bilinear(&g, &self.y, &self.y);
        let guu = linalg::bilinear(&g, u, u);
        let guy = linalg::bilinear(&g, u, &self.y);
        let denominator = gyy * guu - guy * guy;
        if !(denominator.abs() >= 1e-12 * (gyy * guu).abs()) || denominator == 0.0 {
            return Err(Error::DegenerateFlag { denominator });
        }
        Ok(linalg::bilinear(&g, &ru, u) / denominator)
    }

    /// Mean flag curvature over fixed transverse vectors, as a series in `y`.
    fn mean_flag_series(&self, us: &[Vec<f64>]) -> Taylor {
        let n = self.n;
        let consts = |u: &[f64]| u.iter().map(|&v| Taylor::Const(v)).collect::<Vec<_>>();
        let gyy = linalg::bilinear(&self.g, &self.ys, &self.ys);
        let total = sum(us.iter().map(|u| {
            let u = consts(u);
            let ru: Vec<Taylor> = (0..n)
                .map(|i| sum((0..n).map(|k| self.r[i][k].clone() * u[k].clone())))
                .collect();
            let num = linalg::bilinear(&self.g, &ru, &u);
            let guu = linalg::bilinear(&self.g, &u, &u);
            let guy = linalg::bilinear(&self.g, &u, &self.ys);
            num / (gyy.clone() * guu - guy.clone() * guy)
        }));
        total.scale(1.0 / us.len() as f64)
    }

    /// `K_{·i}`: the `y`-gradient of the flag-averaged curvature.
    pub fn flag_gradient(&self, us: &[Vec<f64>]) -> Result<Vec<f64>> {
        if self.r.iter().flatten().any(|t| t.order().unwrap_or(1) == 0) {
            return Err(Error::InvalidParameter(
                "K_{·i} needs R^i_k to first order in y".into(),
            ));
        }
        let k = self.mean_flag_series(us);
        Ok(self.y_vars.iter().map(|&v| k.partial(&[v])).collect())
    }

    /// Draws `m` transverse directions from a seeded unit-sphere
    /// distribution, `g_y`-orthogonalised against `y` and `g_y`-normalised.
    pub fn sample_flags(&self, m: usize, seed: u64) -> Vec<Vec<f64>> {
        let g = self.g();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let gyy = linalg::bilinear(&g, &self.y, &self.y);
        let mut out = Vec::with_capacity(m);
        while out.len() < m {
            let raw: Vec<f64> = (0..self.n)
                .map(|_| StandardNormal.sample(&mut rng))
                .collect();
            let norm = raw.iter().map(|v| v * v).sum::<f64>().sqrt();
            let raw: Vec<f64> = raw.iter().map(|v| v / norm).collect();
            let c = linalg::bilinear(&g, &raw, &self.y) / gyy;
            let u: Vec<f64> = raw.iter().zip(&self.y).map(|(r, y)| r - c * y).collect();
            let len = linalg::bilinear(&g, &u, &u).sqrt();
            if len > 1e-3 * linalg::bilinear(&g, &raw, &raw).sqrt() {
                out.push(u.iter().map(|v| v / len).collect());
            }
        }
        out
    }

    /// Sample variance of `K` over `m ≥ 3` seeded flags and the defect of
    /// `R^i_k = K̄ (F² δ^i_k − F F_{y^k} y^i)` at the mean `K̄`.
    pub fn scalar_flag_stats(&self, m: usize, seed: u64) -> Result<FlagStats> {
        if m < 3 {
            return Err(Error::InvalidParameter(format!(
                "flag count must be at least 3, got {m}"
            )));
        }
        let us = self.sample_flags(m, seed);
        let samples = us
            .iter()
            .map(|u| self.flag_curvature(u))
            .collect::<Result<Vec<_>>>()?;
        let mean = samples.iter().sum::<f64>() / m as f64;
        let variance = samples.iter().map(|k| (k - mean).powi(2)).sum::<f64>() / (m as f64 - 1.0);
        let r = self.riemann();
        let form = self.constant_curvature_form();
        let mut defect = 0.0;
        let mut norm = 0.0;
        for i in 0..self.n {
            for k in 0..self.n {
                defect += (r[i][k] - mean * form[i][k]).powi(2);
                norm += r[i][k].powi(2);
            }
        }
        let residual = if norm > 0.0 {
            (defect / norm).sqrt()
        } else {
            defect.sqrt()
        };
        Ok(FlagStats {
            mean,
            variance,
            residual,
            samples,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlagStats {
    pub mean: f64,
    pub variance: f64,
    pub residual: f64,
    pub samples: Vec<f64>,
}

/// Spray-side data at `(x, y)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SprayCurvature {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub f: f64,
    pub f_y: Vec<f64>,
    pub g: Matrix<f64>,
    pub g_inv: Matrix<f64>,
    pub spray: Vec<f64>,
    pub alpha_spray: Vec<f64>,
    pub connection: Matrix<f64>,
    pub alpha_connection: Matrix<f64>,
    pub spray_yy: Vec<Matrix<f64>>,
    pub spray_yyy: Vec<Vec<Matrix<f64>>>,
    pub spray_x: Matrix<f64>,
    pub riemann: Matrix<f64>,
    pub ricci: f64,
    pub flag_mean: Option<f64>,
    pub flag_gradient: Option<Vec<f64>>,
}

impl SprayCurvature {
    /// Collects everything from a jet of order ≥ 3; `flags = Some((m, seed))`
    /// also fills the flag-averaged `K` and its `y`-gradient.
    pub fn from_jet(jet: &SprayJet, flags: Option<(usize, u64)>) -> Result<SprayCurvature> {
        let dj = DirectionJet::from_spray(jet)?;
        let g = jet.g();
        let (g_inv, _) = linalg::inverse_det(&g).ok_or_else(|| Error::Singular("g_ij".into()))?;
        let (flag_mean, flag_gradient) = match flags {
            Some((m, seed)) => {
                let stats = dj.scalar_flag_stats(m, seed)?;
                let us = dj.sample_flags(m, seed);
                (Some(stats.mean), Some(dj.flag_gradient(&us)?))
            }
            None => (None, None),
        };
        Ok(SprayCurvature {
            x: jet.x.clone(),
            y: jet.y.clone(),
            f: jet.f(),
            f_y: jet.f_y(),
            g,
            g_inv,
            spray: jet.spray(),
            alpha_spray: jet.alpha_spray(),
            connection: jet.connection(),
            alpha_connection: jet.alpha_connection(),
            spray_yy: jet.spray_yy(),
            spray_yyy: jet.spray_yyy(),
            spray_x: jet.spray_x(),
            riemann: dj.riemann(),
            ricci: dj.ricci(),
            flag_mean,
            flag_gradient,
        })
    }
}

/// `R^i_k`, `Ric` and the rest of the spray data at `(x, y)`.
pub fn riemann_curvature(
    metric: &FinslerMetric,
    x: &[f64],
    y: &[f64],
    backend: Backend,
) -> Result<SprayCurvature> {
    let jet = SprayJet::new(metric, x, y, 3, backend)?;
    SprayCurvature::from_jet(&jet, None)
}

/// Flag curvature `K(x, y, u)`.
pub fn flag_curvature(
    metric: &FinslerMetric,
    x: &[f64],
    y: &[f64],
    u: &[f64],
    backend: Backend,
) -> Result<f64> {
    let jet = SprayJet::new(metric, x, y, 2, backend)?;
    DirectionJet::from_spray(&jet)?.flag_curvature(u)
}

pub fn scalar_flag_variance(
    metric: &FinslerMetric,
    x: &[f64],
    y: &[f64],
    m: usize,
    seed: u64,
    backend: Backend,
) -> Result<FlagStats> {
    let jet = SprayJet::new(metric, x, y, 2, backend)?;
    DirectionJet::from_spray(&jet)?.scalar_flag_stats(m, seed)
}
