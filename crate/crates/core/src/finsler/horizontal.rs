use crate::diffcore::{Backend, Scalar, Taylor};
use crate::error::{Error, Result};

use super::spray::{FinslerMetric, SprayJet};

/// `T_{i;m} y^m` (α-covariant) and `T_{i|m} y^m` (Chern-horizontal) of a
/// covector field along `y`.
#[derive(Debug, Clone, PartialEq)]
pub struct HorizontalDerivative {
    pub alpha_part: Vec<f64>,
    pub value: Vec<f64>,
}

/// The field is given as series in the jet's `(x, y)` variables, of order ≥ 1.
///
/// First `T_{i;m}y^m = y^m ∂_m T_i − T_l N̄^l_i − 2 Ḡ^l ∂T_i/∂y^l`, then the
/// deformation `− T_l (N^l_i − N̄^l_i) − 2 ∂T_i/∂y^l (G^l − Ḡ^l)`.
pub fn horizontal_covector(jet: &SprayJet, field: &[Taylor]) -> Result<HorizontalDerivative> {
    let n = jet.n;
    if jet.order < 1 {
        return Err(Error::InvalidParameter(
            "horizontal derivatives need a spray jet of order ≥ 1".into(),
        ));
    }
    let y = &jet.y;
    let (g, g_bar) = (jet.spray(), jet.alpha_spray());
    let (nc, nc_bar) = (jet.connection(), jet.alpha_connection());
    let t: Vec<f64> = field.iter().map(|v| v.value()).collect();
    let mut alpha_part = vec![0.0; n];
    let mut value = vec![0.0; n];
    for i in 0..n {
        let dx: f64 = (0..n).map(|m| y[m] * field[i].partial(&[m])).sum();
        let dy: Vec<f64> = (0..n).map(|l| field[i].partial(&[n + l])).collect();
        let mut a = dx;
        let mut d = 0.0;
        for l in 0..n {
            a -= t[l] * nc_bar[l][i] + 2.0 * g_bar[l] * dy[l];
            d -= t[l] * (nc[l][i] - nc_bar[l][i]) + 2.0 * dy[l] * (g[l] - g_bar[l]);
        }
        alpha_part[i] = a;
        value[i] = a + d;
    }
    Ok(HorizontalDerivative { alpha_part, value })
}

/// `T_{|m} y^m` of a scalar field, by the same two steps.
pub fn horizontal_scalar(jet: &SprayJet, field: &Taylor) -> f64 {
    let n = jet.n;
    let (g, y) = (jet.spray(), &jet.y);
    (0..n)
        .map(|m| y[m] * field.partial(&[m]) - 2.0 * g[m] * field.partial(&[n + m]))
        .sum()
}

/// `T_{|i} = ∂T/∂x^i − N^l_i ∂T/∂y^l` of a scalar field.
pub fn horizontal_gradient(jet: &SprayJet, field: &Taylor) -> Vec<f64> {
    let n = jet.n;
    let nc = jet.connection();
    (0..n)
        .map(|i| {
            field.partial(&[i])
                - (0..n)
                    .map(|l| nc[l][i] * field.partial(&[n + l]))
                    .sum::<f64>()
        })
        .collect()
}

/// `T_{i|m} y^m` for a covector field written as a function of the `(x, y)`
/// series.
pub fn horizontal_derivative_along_y<Fld>(
    metric: &FinslerMetric,
    x: &[f64],
    y: &[f64],
    backend: Backend,
    field: Fld,
) -> Result<HorizontalDerivative>
where
    Fld: Fn(&[Taylor], &[Taylor]) -> Result<Vec<Taylor>>,
{
    let jet = SprayJet::new(metric, x, y, 1, backend)?;
    let t = field(jet.x_vars(), jet.y_vars())?;
    horizontal_covector(&jet, &t)
}
