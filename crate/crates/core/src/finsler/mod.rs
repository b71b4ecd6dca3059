//! Finsler quantities of (α,β)-metrics, mostly Randers metrics `F = α + β`.
//!
//! The source of truth is [`SprayJet`]: a single Taylor expansion of `F²` in
//! the `2n` variables `(x, y)` from which the spray, its jets, the Riemann
//! curvature and the Landsberg tensors are read off. The closed forms in
//! [`closed`] are a second, independent path used for cross-checks.

pub mod closed;
mod curvature;
mod deformation;
mod geodesic;
mod homogeneity;
mod horizontal;
mod nonriemannian;
mod phi;
mod spray;
mod volume;

pub use curvature::{
    flag_curvature, riemann_curvature, scalar_flag_variance, DirectionJet, FlagStats,
    SprayCurvature,
};
pub use deformation::{deformation_jet, randers_deformation};
pub use geodesic::{geodesic_trace, GeodesicPath, GeodesicSample};
pub use homogeneity::{structure_defects, StructureDefect};
pub use horizontal::{
    horizontal_covector, horizontal_derivative_along_y, horizontal_gradient, horizontal_scalar,
    HorizontalDerivative,
};
pub use nonriemannian::{
    mean_cartan, mean_landsberg, non_riemannian, non_riemannian_from_jet, s_curvature,
    scalar_flag_identities, MeanLandsberg, NonRiemannianData, SCurvature, ScalarFlagIdentities,
    KILLING_TOLERANCE,
};
pub use phi::{phi_machinery, PhiFunction, PhiMachinery};
pub use spray::{alpha_connection, alpha_spray, finsler_function, FinslerMetric, SprayJet};
pub use volume::{bh_volume, unit_ball_volume, BhVolume};

use crate::diffcore::linalg::Matrix;
use crate::diffcore::Backend;
use crate::error::{Error, Result};

fn max_rel(a: &[f64], b: &[f64]) -> f64 {
    let scale = a.iter().chain(b).fold(0.0f64, |m, v| m.max(v.abs()));
    a.iter()
        .zip(b)
        .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
        / (1.0 + scale)
}

fn flat(m: &Matrix<f64>) -> Vec<f64> {
    m.iter().flatten().copied().collect()
}

fn assert_close(what: &str, a: &[f64], b: &[f64], tol: f64) -> Result<()> {
    let diff = max_rel(a, b);
    if diff > tol {
        return Err(Error::Inconsistent {
            what: what.into(),
            diff,
        });
    }
    Ok(())
}

/// Fundamental tensor `g_ij`, its inverse and determinant.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct FundamentalTensor {
    pub g: Matrix<f64>,
    pub g_inv: Matrix<f64>,
    pub det: f64,
}

/// `g_ij = ½ ∂²F²/∂y^i∂y^j` from the `y`-jet; for Randers metrics the closed
/// form is checked to agree within 1e-10.
pub fn fundamental_tensor(
    metric: &FinslerMetric,
    x: &[f64],
    y: &[f64],
    backend: Backend,
) -> Result<FundamentalTensor> {
    let jet = SprayJet::new(metric, x, y, 0, backend)?;
    let g = jet.g();
    if metric.is_randers() {
        let c = closed::randers_fundamental_tensor(&jet.alpha, &jet.beta, y)?;
        assert_close("fundamental tensor", &flat(&g), &flat(&c), 1e-10)?;
    }
    let (g_inv, det) = crate::diffcore::linalg::inverse_det(&g)
        .ok_or_else(|| Error::Singular(format!("g_ij at x = {x:?}, y = {y:?}")))?;
    Ok(FundamentalTensor { g, g_inv, det })
}

/// `G^i` and `Ḡ^i`. For Randers metrics the general closed form is checked,
/// and so is the Killing form whenever `β` is Killing.
pub fn spray(
    metric: &FinslerMetric,
    x: &[f64],
    y: &[f64],
    backend: Backend,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let jet = SprayJet::new(metric, x, y, 0, backend)?;
    let g = jet.spray();
    if metric.is_randers() && backend == Backend::Dual {
        assert_close(
            "Randers spray",
            &g,
            &closed::randers_spray(&jet.alpha, &jet.beta, y)?,
            1e-8,
        )?;
        if jet.beta.killing_defect() < KILLING_TOLERANCE {
            assert_close(
                "Killing spray",
                &g,
                &closed::killing_spray(&jet.alpha, &jet.beta, y)?,
                1e-8,
            )?;
        }
    }
    Ok((g, jet.alpha_spray()))
}

/// `N^i_j` and `N̄^i_j`, checked against the Killing closed form when it
/// applies.
pub fn nonlinear_connection(
    metric: &FinslerMetric,
    x: &[f64],
    y: &[f64],
    backend: Backend,
) -> Result<(Matrix<f64>, Matrix<f64>)> {
    let jet = SprayJet::new(metric, x, y, 1, backend)?;
    let n_conn = jet.connection();
    if metric.is_randers()
        && backend == Backend::Dual
        && jet.beta.killing_defect() < KILLING_TOLERANCE
    {
        let c = closed::killing_connection(&jet.alpha, &jet.beta, y)?;
        assert_close("nonlinear connection", &flat(&n_conn), &flat(&c), 1e-8)?;
    }
    Ok((n_conn, jet.alpha_connection()))
}
