use serde::Serialize;

use crate::diffcore::{Backend, Scalar, Taylor};
use crate::error::{Error, Result};
use crate::riemann::contract_with_y;

use super::closed;
use super::curvature::DirectionJet;
use super::horizontal::{horizontal_covector, horizontal_gradient};
use super::spray::{FinslerMetric, SprayJet};

/// Killing defect below which the Killing-only closed forms are asserted.
pub const KILLING_TOLERANCE: f64 = 1e-10;

/// Non-Riemannian quantities at `(x, y)`, each by every available path.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NonRiemannianData {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub f: f64,
    pub tau: f64,
    pub rho: f64,
    pub rho_i: Vec<f64>,
    pub rho0: f64,
    /// Closed form `(n+1){e_00/(2F) − (s_0 + ρ_0)}`.
    pub s_curvature: f64,
    /// `∂G^m/∂y^m − y^m ∂_m log σ_BH`.
    pub s_curvature_spray: f64,
    /// `−(n+1){α s_0/F + ρ_0}` when `β` is Killing.
    pub s_curvature_killing: Option<f64>,
    pub mean_cartan: Vec<f64>,
    /// `∂τ/∂y^i`.
    pub mean_cartan_jet: Vec<f64>,
    pub landsberg: Vec<Vec<Vec<f64>>>,
    /// `g^ij L_ijk`.
    pub mean_landsberg: Vec<f64>,
    /// General (α,β) closed form; absent when `y` is parallel to `b^♯`.
    pub mean_landsberg_closed: Option<Vec<f64>>,
    pub mean_landsberg_killing: Option<Vec<f64>>,
    pub j_bar: f64,
    pub j_bar_closed: f64,
    pub j_bar_killing: Option<f64>,
    pub sigma_bh: f64,
}

fn vec_diff(a: &[f64], b: &[f64]) -> f64 {
    let scale = a.iter().chain(b).fold(0.0f64, |m, v| m.max(v.abs()));
    let d = a
        .iter()
        .zip(b)
        .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    d / (1.0 + scale)
}

fn scalar_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / (1.0 + a.abs().max(b.abs()))
}

impl NonRiemannianData {
    /// Relative disagreement of every pair of paths.
    pub fn disagreements(&self) -> Vec<(&'static str, f64)> {
        let mut out = vec![
            ("S", scalar_diff(self.s_curvature, self.s_curvature_spray)),
            ("I", vec_diff(&self.mean_cartan, &self.mean_cartan_jet)),
            ("J_bar", scalar_diff(self.j_bar, self.j_bar_closed)),
        ];
        if let Some(s) = self.s_curvature_killing {
            out.push(("S_killing", scalar_diff(s, self.s_curvature)));
        }
        if let Some(j) = &self.mean_landsberg_closed {
            out.push(("J", vec_diff(&self.mean_landsberg, j)));
        }
        if let Some(j) = &self.mean_landsberg_killing {
            out.push(("J_killing", vec_diff(&self.mean_landsberg, j)));
        }
        if let Some(j) = self.j_bar_killing {
            out.push(("J_bar_killing", scalar_diff(self.j_bar, j)));
        }
        out
    }

    pub fn check(&self, tol: f64) -> Result<()> {
        for (what, diff) in self.disagreements() {
            if !(diff <= tol) {
                return Err(Error::Inconsistent {
                    what: what.to_string(),
                    diff,
                });
            }
        }
        Ok(())
    }

    /// `L_ijk` minus its index permutations, largest entry.
    pub fn landsberg_asymmetry(&self) -> f64 {
        let l = &self.landsberg;
        let n = l.len();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    worst = worst
                        .max((l[i][j][k] - l[j][i][k]).abs())
                        .max((l[i][j][k] - l[i][k][j]).abs());
                }
            }
        }
        worst
    }
}

fn require_randers(metric: &FinslerMetric) -> Result<()> {
    if metric.is_randers() {
        Ok(())
    } else {
        Err(Error::NotApplicable(
            "closed forms for S, τ and σ_BH are implemented for Randers metrics".into(),
        ))
    }
}

/// Assembles the data from a spray jet of order ≥ 3.
pub fn non_riemannian_from_jet(
    metric: &FinslerMetric,
    jet: &SprayJet,
) -> Result<NonRiemannianData> {
    require_randers(metric)?;
    let n = jet.n;
    let (alpha, beta, y) = (&jet.alpha, &jet.beta, &jet.y);
    let c = contract_with_y(beta, alpha, y)?;
    let b2 = jet.b2_series();
    let one_minus = 1.0 - b2.value();
    let rho_i: Vec<f64> = (0..n)
        .map(|i| -b2.partial(&[i]) / (2.0 * one_minus))
        .collect();
    let rho0: f64 = rho_i.iter().zip(y).map(|(r, v)| r * v).sum();
    let killing = beta.killing_defect() < KILLING_TOLERANCE;

    let tau = jet.distortion_series()?;
    let s_spray = jet.s_curvature_series()?;
    let landsberg = jet.landsberg_series()?;
    let j = jet.mean_landsberg_series()?;
    let mean_landsberg: Vec<f64> = j.iter().map(|v| v.value()).collect();
    let j_bar = mean_landsberg
        .iter()
        .zip(&beta.b_up)
        .map(|(a, b)| a * b)
        .sum();

    let mean_landsberg_closed = match closed::mean_landsberg_closed(&metric.phi, alpha, beta, y) {
        Ok(v) => Some(v),
        Err(Error::DegenerateDirection { .. }) => None,
        Err(e) => return Err(e),
    };
    Ok(NonRiemannianData {
        x: jet.x.clone(),
        y: y.clone(),
        f: jet.f(),
        tau: tau.value(),
        rho: 0.5 * one_minus.ln(),
        rho_i,
        rho0,
        s_curvature: closed::randers_s_curvature(&c, n, rho0),
        s_curvature_spray: s_spray.value(),
        s_curvature_killing: killing.then(|| closed::killing_s_curvature(&c, n, rho0)),
        mean_cartan: closed::mean_cartan_closed(&metric.phi, alpha, beta, y)?,
        mean_cartan_jet: (0..n).map(|i| tau.partial(&[n + i])).collect(),
        landsberg: landsberg
            .iter()
            .map(|m| {
                m.iter()
                    .map(|r| r.iter().map(|v| v.value()).collect())
                    .collect()
            })
            .collect(),
        mean_landsberg,
        mean_landsberg_closed,
        mean_landsberg_killing: if killing {
            Some(closed::killing_mean_landsberg(alpha, beta, y)?)
        } else {
            None
        },
        j_bar,
        j_bar_closed: closed::j_bar_closed(&metric.phi, alpha, beta, y)?,
        j_bar_killing: if killing {
            Some(closed::killing_j_bar(alpha, beta, y)?)
        } else {
            None
        },
        sigma_bh: closed::randers_sigma_bh(alpha, beta)?,
    })
}

pub fn non_riemannian(
    metric: &FinslerMetric,
    x: &[f64],
    y: &[f64],
    backend: Backend,
) -> Result<NonRiemannianData> {
    let jet = SprayJet::new(metric, x, y, 3, backend)?;
    non_riemannian_from_jet(metric, &jet)
}

/// S-curvature, distortion and `ρ_0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SCurvature {
    pub s: f64,
    pub s_spray: f64,
    pub tau: f64,
    pub rho0: f64,
}

/// S-curvature by the closed form, cross-checked against the spray path
/// within 1e-6.
pub fn s_curvature(
    metric: &FinslerMetric,
    x: &[f64],
    y: &[f64],
    backend: Backend,
) -> Result<SCurvature> {
    require_randers(metric)?;
    let jet = SprayJet::new(metric, x, y, 1, backend)?;
    let n = jet.n;
    let c = contract_with_y(&jet.beta, &jet.alpha, y)?;
    let b2 = jet.b2_series();
    let rho0: f64 = (0..n)
        .map(|i| -b2.partial(&[i]) / (2.0 * (1.0 - b2.value())) * y[i])
        .sum();
    let s = closed::randers_s_curvature(&c, n, rho0);
    let s_spray = jet.s_curvature_series()?.value();
    let diff = scalar_diff(s, s_spray);
    if diff > 1e-6 {
        return Err(Error::Inconsistent {
            what: "S-curvature".into(),
            diff,
        });
    }
    Ok(SCurvature {
        s,
        s_spray,
        tau: jet.distortion_series()?.value(),
        rho0,
    })
}

/// Mean Cartan torsion by the closed form, checked against `∂τ/∂y` within 1e-6.
pub fn mean_cartan(
    metric: &FinslerMetric,
    x: &[f64],
    y: &[f64],
    backend: Backend,
) -> Result<Vec<f64>> {
    let jet = SprayJet::new(metric, x, y, 1, backend)?;
    let closed = closed::mean_cartan_closed(&metric.phi, &jet.alpha, &jet.beta, y)?;
    if metric.is_randers() {
        let tau = jet.distortion_series()?;
        let via_jet: Vec<f64> = (0..jet.n).map(|i| tau.partial(&[jet.n + i])).collect();
        let diff = vec_diff(&closed, &via_jet);
        if diff > 1e-6 {
            return Err(Error::Inconsistent {
                what: "mean Cartan torsion".into(),
                diff,
            });
        }
    }
    Ok(closed)
}

/// `J_i`, `J̄` and `L_ijk` by the definition, checked against every
/// applicable closed form within 1e-6.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeanLandsberg {
    pub j: Vec<f64>,
    pub j_bar: f64,
    pub landsberg: Vec<Vec<Vec<f64>>>,
}

pub fn mean_landsberg(
    metric: &FinslerMetric,
    x: &[f64],
    y: &[f64],
    backend: Backend,
) -> Result<MeanLandsberg> {
    let data = non_riemannian(metric, x, y, backend)?;
    for (what, diff) in data.disagreements() {
        if what.starts_with('J') && diff > 1e-6 {
            return Err(Error::Inconsistent {
                what: what.to_string(),
                diff,
            });
        }
    }
    Ok(MeanLandsberg {
        j: data.mean_landsberg,
        j_bar: data.j_bar,
        landsberg: data.landsberg,
    })
}

/// Both sides of the two identities that hold for scalar flag curvature:
/// `S_{·i|m}y^m − S_{|i} = −(n+1)/3 K_{·i} F²` and
/// `J_{i|m}y^m + K F² I_i = −(n+1)/3 F² K_{·i}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalarFlagIdentities {
    pub k: f64,
    pub k_gradient: Vec<f64>,
    pub flag_variance: f64,
    pub s_lhs: Vec<f64>,
    pub s_rhs: Vec<f64>,
    pub j_lhs: Vec<f64>,
    pub j_rhs: Vec<f64>,
}

fn identity_residual(lhs: &[f64], rhs: &[f64]) -> f64 {
    let big = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let d = lhs
        .iter()
        .zip(rhs)
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    d / (1.0 + big(lhs) + big(rhs))
}

impl ScalarFlagIdentities {
    pub fn s_residual(&self) -> f64 {
        identity_residual(&self.s_lhs, &self.s_rhs)
    }

    pub fn j_residual(&self) -> f64 {
        identity_residual(&self.j_lhs, &self.j_rhs)
    }
}

pub fn scalar_flag_identities(
    metric: &FinslerMetric,
    x: &[f64],
    y: &[f64],
    flags: usize,
    seed: u64,
    backend: Backend,
) -> Result<ScalarFlagIdentities> {
    require_randers(metric)?;
    let jet = SprayJet::new(metric, x, y, 4, backend)?;
    let n = jet.n;
    let dj = DirectionJet::from_spray(&jet)?;
    let stats = dj.scalar_flag_stats(flags, seed)?;
    let us = dj.sample_flags(flags, seed);
    let k_gradient = dj.flag_gradient(&us)?;
    let f = jet.f();
    let n1 = n as f64 + 1.0;
    let rhs: Vec<f64> = k_gradient.iter().map(|k| -n1 / 3.0 * k * f * f).collect();

    let s = jet.s_curvature_series()?;
    let s_y: Vec<Taylor> = (0..n).map(|i| s.diff(n + i)).collect();
    let s_h = horizontal_covector(&jet, &s_y)?.value;
    let s_grad = horizontal_gradient(&jet, &s);
    let s_lhs: Vec<f64> = (0..n).map(|i| s_h[i] - s_grad[i]).collect();

    let j = jet.mean_landsberg_series()?;
    let j_h = horizontal_covector(&jet, &j)?.value;
    let tau = jet.distortion_series()?;
    let j_lhs: Vec<f64> = (0..n)
        .map(|i| j_h[i] + stats.mean * f * f * tau.partial(&[n + i]))
        .collect();
    Ok(ScalarFlagIdentities {
        k: stats.mean,
        k_gradient,
        flag_variance: stats.variance,
        s_lhs,
        s_rhs: rhs.clone(),
        j_lhs,
        j_rhs: rhs,
    })
}
