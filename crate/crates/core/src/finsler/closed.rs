//! Closed-form expressions for (α,β)-metrics in terms of `α`, `β` and the
//! covariant derivatives of `β`. These are the second computation path
//! checked against the jet-based definitions.

use crate::diffcore::linalg::Matrix;
use crate::error::{Error, Result};
use crate::riemann::{contract_with_y, AlphaData, BetaData, DirectionalContractions};

use super::phi::{phi_machinery, PhiFunction, PhiMachinery};
use super::spray::alpha_spray;

/// `h_i = α b_i − s y_i`.
pub fn h_vector(beta: &BetaData, c: &DirectionalContractions) -> Vec<f64> {
    (0..beta.n)
        .map(|i| c.alpha * beta.b[i] - c.s * c.y_low[i])
        .collect()
}

/// `g_ij = (F/α)(a_ij − y_i y_j/α²) + (y_i/α + b_i)(y_j/α + b_j)`.
pub fn randers_fundamental_tensor(
    alpha: &AlphaData,
    beta: &BetaData,
    y: &[f64],
) -> Result<Matrix<f64>> {
    let c = contract_with_y(beta, alpha, y)?;
    let n = alpha.n;
    let f = c.alpha + c.beta;
    let u: Vec<f64> = (0..n).map(|i| c.y_low[i] / c.alpha + beta.b[i]).collect();
    Ok((0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    f / c.alpha * (alpha.a[i][j] - c.y_low[i] * c.y_low[j] / (c.alpha * c.alpha))
                        + u[i] * u[j]
                })
                .collect()
        })
        .collect())
}

/// Spray of a general Randers metric:
/// `G^i = Ḡ^i + (e_00/(2F) − s_0) y^i + α s^i_0` with `e_00 = r_00 + 2β s_0`.
pub fn randers_spray(alpha: &AlphaData, beta: &BetaData, y: &[f64]) -> Result<Vec<f64>> {
    let c = contract_with_y(beta, alpha, y)?;
    let f = c.alpha + c.beta;
    let e00 = c.r00 + 2.0 * c.beta * c.s0;
    let bar = alpha_spray(alpha, y);
    Ok((0..alpha.n)
        .map(|i| bar[i] + (e00 / (2.0 * f) - c.s0) * y[i] + c.alpha * c.s_up0[i])
        .collect())
}

/// Spray of a Randers metric with Killing `β`: `G^i = Ḡ^i + α s^i_0 − α s_0 y^i / F`.
pub fn killing_spray(alpha: &AlphaData, beta: &BetaData, y: &[f64]) -> Result<Vec<f64>> {
    let c = contract_with_y(beta, alpha, y)?;
    let f = c.alpha + c.beta;
    let bar = alpha_spray(alpha, y);
    Ok((0..alpha.n)
        .map(|i| bar[i] + c.alpha * c.s_up0[i] - c.alpha * c.s0 * y[i] / f)
        .collect())
}

/// `y`-derivative of [`killing_spray`]:
/// `N^i_j = N̄^i_j + y_j s^i_0/α + α s^i_j − (y_j s_0 y^i/α + α s_j y^i + α s_0 δ^i_j)/F + s_0 y^i (y_j + α b_j)/F²`.
pub fn killing_connection(alpha: &AlphaData, beta: &BetaData, y: &[f64]) -> Result<Matrix<f64>> {
    let c = contract_with_y(beta, alpha, y)?;
    let n = alpha.n;
    let (a, f) = (c.alpha, c.alpha + c.beta);
    let bar = super::spray::alpha_connection(alpha, y);
    Ok((0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let kron = if i == j { 1.0 } else { 0.0 };
                    bar[i][j] + c.y_low[j] * c.s_up0[i] / a + a * beta.s_up[i][j]
                        - (c.y_low[j] * c.s0 * y[i] / a
                            + a * beta.s_vec[j] * y[i]
                            + a * c.s0 * kron)
                            / f
                        + c.s0 * y[i] * (c.y_low[j] + a * beta.b[j]) / (f * f)
                })
                .collect()
        })
        .collect())
}

fn machinery(
    phi: &PhiFunction,
    beta: &BetaData,
    c: &DirectionalContractions,
) -> Result<PhiMachinery> {
    phi_machinery(phi, c.s, beta.b2, beta.n)
}

/// Mean Cartan torsion `I_i = −Φ(φ − sφ′) h_i / (2Δφα²)`.
pub fn mean_cartan_closed(
    phi: &PhiFunction,
    alpha: &AlphaData,
    beta: &BetaData,
    y: &[f64],
) -> Result<Vec<f64>> {
    let c = contract_with_y(beta, alpha, y)?;
    let m = machinery(phi, beta, &c)?;
    let h = h_vector(beta, &c);
    let k = -m.big_phi * (m.phi - m.s * m.phi1) / (2.0 * m.delta * m.phi * c.alpha * c.alpha);
    Ok(h.iter().map(|v| k * v).collect())
}

/// Randers specialisation `I_i = (n+1) h_i / (2α²(1+s))`.
pub fn randers_mean_cartan(alpha: &AlphaData, beta: &BetaData, y: &[f64]) -> Result<Vec<f64>> {
    let c = contract_with_y(beta, alpha, y)?;
    let n1 = beta.n as f64 + 1.0;
    let k = n1 / (2.0 * c.alpha * c.alpha * (1.0 + c.s));
    Ok(h_vector(beta, &c).iter().map(|v| k * v).collect())
}

fn transverse(beta: &BetaData, c: &DirectionalContractions) -> Result<f64> {
    let w = beta.b2 - c.s * c.s;
    if w.abs() <= 1e-12 {
        return Err(Error::DegenerateDirection { norm: w });
    }
    Ok(w)
}

/// Mean Landsberg curvature of an (α,β)-metric from `φ` and the covariant
/// derivatives of `β`. Undefined when `y` is parallel to `b^♯`.
///
/// The coefficient of `(s_0 + r_0) h_i` is `Φ/Δ + (n+1)(Q − sQ′)`; with a
/// plus sign the formula disagrees with `g^ij L_ijk` for non-Randers `φ`.
pub fn mean_landsberg_closed(
    phi: &PhiFunction,
    alpha: &AlphaData,
    beta: &BetaData,
    y: &[f64],
) -> Result<Vec<f64>> {
    let c = contract_with_y(beta, alpha, y)?;
    let m = machinery(phi, beta, &c)?;
    let w = transverse(beta, &c)?;
    let h = h_vector(beta, &c);
    let (a, n1) = (c.alpha, beta.n as f64 + 1.0);
    let pd = m.big_phi / m.delta;
    let first = 2.0 * a * a / w * (pd + n1 * (m.q - m.s * m.q1)) * (c.s0 + c.r0);
    let second = a / w * (m.psi1 + m.s * pd) * (c.r00 - 2.0 * a * m.q * c.s0);
    Ok((0..beta.n)
        .map(|i| {
            let bracket = -a * m.q1 * c.s0 * h[i]
                + a * m.q * (a * a * beta.s_vec[i] - c.y_low[i] * c.s0)
                + a * a * m.delta * c.s_i0[i]
                + a * a * (c.r_i0[i] - 2.0 * a * m.q * beta.s_vec[i])
                - (c.r00 - 2.0 * a * m.q * c.s0) * c.y_low[i];
            let total = (first + second) * h[i] + a * bracket * pd;
            -total / (2.0 * m.delta * a.powi(4))
        })
        .collect())
}

/// Randers metric with Killing `β`:
/// `J_i = (n+1)/(2α²(1+s)) { s_0 h_i/(1+s) + α(1+s) s_{i0} − α² s_i + s_0 y_i }`.
pub fn killing_mean_landsberg(alpha: &AlphaData, beta: &BetaData, y: &[f64]) -> Result<Vec<f64>> {
    let c = contract_with_y(beta, alpha, y)?;
    let h = h_vector(beta, &c);
    let (a, p, n1) = (c.alpha, 1.0 + c.s, beta.n as f64 + 1.0);
    let k = n1 / (2.0 * a * a * p);
    Ok((0..beta.n)
        .map(|i| {
            k * (c.s0 * h[i] / p + a * p * c.s_i0[i] - a * a * beta.s_vec[i] + c.s0 * c.y_low[i])
        })
        .collect())
}

/// `J̄ = J_i b^i = −{Ψ₁(r_00 − 2αQ s_0) + αΨ₂(r_0 + s_0)} / (2Δα²)`.
pub fn j_bar_closed(
    phi: &PhiFunction,
    alpha: &AlphaData,
    beta: &BetaData,
    y: &[f64],
) -> Result<f64> {
    let c = contract_with_y(beta, alpha, y)?;
    let m = machinery(phi, beta, &c)?;
    let a = c.alpha;
    Ok(
        -(m.psi1 * (c.r00 - 2.0 * a * m.q * c.s0) + a * m.psi2 * (c.r0 + c.s0))
            / (2.0 * m.delta * a * a),
    )
}

/// Randers metric with Killing `β`: `J̄ = (n+1)(1 + 3s + b² + s²) s_0 / (2α(1+s)²)`.
pub fn killing_j_bar(alpha: &AlphaData, beta: &BetaData, y: &[f64]) -> Result<f64> {
    let c = contract_with_y(beta, alpha, y)?;
    let (s, n1) = (c.s, beta.n as f64 + 1.0);
    Ok(n1 * (1.0 + 3.0 * s + beta.b2 + s * s) * c.s0 / (2.0 * c.alpha * (1.0 + s) * (1.0 + s)))
}

/// `ρ_i = ∂_i log√(1 − b²) = −(r_i + s_i)/(1 − b²)`, written covariantly so
/// that it also holds in frames.
pub fn rho_covector(beta: &BetaData) -> Vec<f64> {
    (0..beta.n)
        .map(|i| -(beta.r_vec[i] + beta.s_vec[i]) / (1.0 - beta.b2))
        .collect()
}

/// S-curvature of a Randers metric, `S = (n+1){e_00/(2F) − (s_0 + ρ_0)}`,
/// given `ρ_0`.
pub fn randers_s_curvature(c: &DirectionalContractions, n: usize, rho0: f64) -> f64 {
    let f = c.alpha + c.beta;
    let e00 = c.r00 + 2.0 * c.beta * c.s0;
    (n as f64 + 1.0) * (e00 / (2.0 * f) - (c.s0 + rho0))
}

/// Killing specialisation `S = −(n+1){α s_0/F + ρ_0}`.
pub fn killing_s_curvature(c: &DirectionalContractions, n: usize, rho0: f64) -> f64 {
    let f = c.alpha + c.beta;
    -(n as f64 + 1.0) * (c.alpha * c.s0 / f + rho0)
}

/// `σ_BH = (1 − b²)^{(n+1)/2} √det a` for a Randers metric.
pub fn randers_sigma_bh(alpha: &AlphaData, beta: &BetaData) -> Result<f64> {
    if beta.b2 >= 1.0 {
        return Err(Error::RandersNorm {
            point: alpha.point.clone(),
            norm: beta.b2.sqrt(),
        });
    }
    Ok((1.0 - beta.b2).powf((alpha.n as f64 + 1.0) / 2.0) * alpha.det_a.sqrt())
}
