//! Degree and orthogonality checks of the `y`-dependent quantities.

use serde::Serialize;

use crate::diffcore::linalg;
use crate::diffcore::Backend;
use crate::error::Result;

use super::curvature::riemann_curvature;
use super::nonriemannian::non_riemannian;
use super::spray::FinslerMetric;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StructureDefect {
    pub quantity: &'static str,
    /// Relative defect; 0 for an exact identity.
    pub defect: f64,
}

fn rel(a: &[f64], b: &[f64]) -> f64 {
    let scale = a.iter().chain(b).fold(0.0f64, |m, v| m.max(v.abs()));
    a.iter()
        .zip(b)
        .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
        / (1.0 + scale)
}

fn scaled(v: &[f64], k: f64) -> Vec<f64> {
    v.iter().map(|x| x * k).collect()
}

/// Compares `F`, `G^i`, `R^i_k`, `Ric`, `S`, `I_i`, `J_i` at `y` and `λy`
/// against their degrees (1, 2, 2, 2, 1, −1, 0), and checks
/// `R^i_k y^k = 0`, `g_y(y, y) = F²`, `I_i y^i = 0`, `J_i y^i = 0`.
pub fn structure_defects(
    metric: &FinslerMetric,
    x: &[f64],
    y: &[f64],
    lambda: f64,
    backend: Backend,
) -> Result<Vec<StructureDefect>> {
    let ly = scaled(y, lambda);
    let (c1, c2) = (
        riemann_curvature(metric, x, y, backend)?,
        riemann_curvature(metric, x, &ly, backend)?,
    );
    let (n1, n2) = (
        non_riemannian(metric, x, y, backend)?,
        non_riemannian(metric, x, &ly, backend)?,
    );
    let l2 = lambda * lambda;
    let flat = |m: &Vec<Vec<f64>>| m.iter().flatten().copied().collect::<Vec<_>>();
    let ry = linalg::mat_vec(&c1.riemann, y);
    let gyy = linalg::bilinear(&c1.g, y, y);
    let dot = |u: &[f64]| u.iter().zip(y).map(|(a, b)| a * b).sum::<f64>();
    let ry_scale = c1
        .riemann
        .iter()
        .flatten()
        .fold(0.0f64, |m, v| m.max(v.abs()))
        * y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(vec![
        StructureDefect {
            quantity: "F",
            defect: rel(&[c2.f], &[lambda * c1.f]),
        },
        StructureDefect {
            quantity: "G",
            defect: rel(&c2.spray, &scaled(&c1.spray, l2)),
        },
        StructureDefect {
            quantity: "R",
            defect: rel(&flat(&c2.riemann), &scaled(&flat(&c1.riemann), l2)),
        },
        StructureDefect {
            quantity: "Ric",
            defect: rel(&[c2.ricci], &[l2 * c1.ricci]),
        },
        StructureDefect {
            quantity: "S",
            defect: rel(&[n2.s_curvature], &[lambda * n1.s_curvature]),
        },
        StructureDefect {
            quantity: "I",
            defect: rel(&n2.mean_cartan, &scaled(&n1.mean_cartan, 1.0 / lambda)),
        },
        StructureDefect {
            quantity: "J",
            defect: rel(&n2.mean_landsberg, &n1.mean_landsberg),
        },
        StructureDefect {
            quantity: "R y",
            defect: ry.iter().fold(0.0f64, |m, v| m.max(v.abs())) / (1.0 + ry_scale),
        },
        StructureDefect {
            quantity: "g(y,y) - F^2",
            defect: rel(&[gyy], &[c1.f * c1.f]),
        },
        StructureDefect {
            quantity: "I y",
            defect: dot(&n1.mean_cartan).abs() / (1.0 + c1.f),
        },
        StructureDefect {
            quantity: "J y",
            defect: dot(&n1.mean_landsberg).abs() / (1.0 + c1.f),
        },
    ])
}
