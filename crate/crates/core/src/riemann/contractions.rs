use serde::Serialize;

use super::{AlphaData, BetaData};
use crate::diffcore::linalg::{bilinear, mat_vec};
use crate::error::{Error, Result};

/// `β`-tensors contracted with a direction `y` (index `0` means "contracted
/// with y").
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DirectionalContractions {
    pub y: Vec<f64>,
    /// `y_i = a_ij y^j`
    pub y_low: Vec<f64>,
    pub alpha: f64,
    pub beta: f64,
    pub s: f64,
    pub s0: f64,
    pub r0: f64,
    pub t0: f64,
    /// `s_{i0} = s_ij y^j`
    pub s_i0: Vec<f64>,
    /// `s^i_0 = s^i_j y^j`
    pub s_up0: Vec<f64>,
    /// `r_{i0} = r_ij y^j`
    pub r_i0: Vec<f64>,
    pub r00: f64,
    pub t00: f64,
    /// `s_{0;0} = s_{i;j} y^i y^j`
    pub s00_cov: f64,
    /// `s^m_{0;m} = D_k y^k`
    pub div0: f64,
}

impl DirectionalContractions {
    /// Degree in `y` of each scalar field, used by homogeneity checks.
    pub const DEGREES: [(&'static str, i32); 11] = [
        ("alpha", 1),
        ("beta", 1),
        ("s", 0),
        ("s0", 1),
        ("r0", 1),
        ("t0", 1),
        ("r00", 2),
        ("t00", 2),
        ("s00_cov", 2),
        ("div0", 1),
        ("s_i0", 1),
    ];

    pub fn scalar(&self, name: &str) -> f64 {
        match name {
            "alpha" => self.alpha,
            "beta" => self.beta,
            "s" => self.s,
            "s0" => self.s0,
            "r0" => self.r0,
            "t0" => self.t0,
            "r00" => self.r00,
            "t00" => self.t00,
            "s00_cov" => self.s00_cov,
            "div0" => self.div0,
            "s_i0" => self.s_i0.iter().map(|v| v * v).sum::<f64>().sqrt(),
            _ => f64::NAN,
        }
    }
}

fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

/// Contracts `β`-data with `y`; refuses directions shorter than
/// `1e-8 (1 + |x|)`.
pub fn contract_with_y(
    beta: &BetaData,
    alpha: &AlphaData,
    y: &[f64],
) -> Result<DirectionalContractions> {
    let ynorm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
    let xnorm = alpha.point.iter().map(|v| v * v).sum::<f64>().sqrt();
    if !(ynorm >= 1e-8 * (1.0 + xnorm)) {
        return Err(Error::DegenerateDirection { norm: ynorm });
    }
    let y_low = mat_vec(&alpha.a, y);
    let alpha_y = dot(&y_low, y).sqrt();
    let beta_y = dot(&beta.b, y);
    let s_i0 = mat_vec(&beta.s, y);
    Ok(DirectionalContractions {
        y: y.to_vec(),
        y_low,
        alpha: alpha_y,
        beta: beta_y,
        s: beta_y / alpha_y,
        s0: dot(&beta.s_vec, y),
        r0: dot(&beta.r_vec, y),
        t0: dot(&beta.t_vec, y),
        s_up0: mat_vec(&beta.s_up, y),
        r_i0: mat_vec(&beta.r, y),
        r00: bilinear(&beta.r, y, y),
        t00: bilinear(&beta.t, y, y),
        s00_cov: bilinear(&beta.s_vec_cov, y, y),
        div0: dot(&beta.div, y),
        s_i0,
    })
}
