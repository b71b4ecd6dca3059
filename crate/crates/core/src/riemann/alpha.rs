use serde::Serialize;

use crate::diffcore::{evaluate_jet, linalg, Backend, JetTable};
use crate::error::{Error, Result};
use crate::metricdsl::MetricSpec;

/// Riemannian data of `α` at one point, in a coordinate or orthonormal frame.
///
/// `conn[i][j][k]` is the connection coefficient used by covariant
/// derivatives: `T_{i;k} = e_k T_i − T_s conn[s][i][k]`. In coordinates it is
/// the Christoffel symbol `Γ^i_jk`; in a frame it is `ω_j^i(e_k)`.
/// `riemann[i][j][k][l]` follows `R^i_jkl = ∂_kΓ^i_jl − ∂_lΓ^i_jk + Γ^i_km Γ^m_jl − Γ^i_lm Γ^m_jk`
/// and `ricci[j][l] = R^i_jil`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlphaData {
    pub n: usize,
    pub point: Vec<f64>,
    pub a: Vec<Vec<f64>>,
    pub a_inv: Vec<Vec<f64>>,
    pub det_a: f64,
    pub conn: Vec<Vec<Vec<f64>>>,
    /// `d_conn[i][j][k][m] = e_m(conn[i][j][k])`.
    pub d_conn: Vec<Vec<Vec<Vec<f64>>>>,
    pub riemann: Vec<Vec<Vec<Vec<f64>>>>,
    /// `R_ijkl = a_im R^m_jkl`.
    pub riemann_lower: Vec<Vec<Vec<Vec<f64>>>>,
    pub ricci: Vec<Vec<f64>>,
    /// True for orthonormal-frame data (`a = δ`, non-symmetric `conn`).
    pub frame: bool,
}

pub(crate) fn zeros2(n: usize) -> Vec<Vec<f64>> {
    vec![vec![0.0; n]; n]
}

pub(crate) fn zeros3(n: usize) -> Vec<Vec<Vec<f64>>> {
    vec![zeros2(n); n]
}

pub(crate) fn zeros4(n: usize) -> Vec<Vec<Vec<Vec<f64>>>> {
    vec![zeros3(n); n]
}

/// Partial derivatives of the metric components at a point.
pub struct ComponentJet {
    pub n: usize,
    pub a: Vec<Vec<f64>>,
    /// `da[i][j][k] = ∂_k a_ij`
    pub da: Vec<Vec<Vec<f64>>>,
    /// `dda[i][j][k][l] = ∂_k ∂_l a_ij`
    pub dda: Vec<Vec<Vec<Vec<f64>>>>,
    pub b: Vec<f64>,
    /// `db[i][j] = ∂_j b_i`
    pub db: Vec<Vec<f64>>,
    /// `ddb[i][j][k] = ∂_j ∂_k b_i`
    pub ddb: Vec<Vec<Vec<f64>>>,
}

impl ComponentJet {
    pub fn from_jet(n: usize, jet: &JetTable) -> ComponentJet {
        let d1 = jet.d1.as_ref().expect("component jet needs order ≥ 1");
        let d2 = jet.d2.as_ref().expect("component jet needs order ≥ 2");
        let mut out = ComponentJet {
            n,
            a: zeros2(n),
            da: zeros3(n),
            dda: zeros4(n),
            b: vec![0.0; n],
            db: zeros2(n),
            ddb: zeros3(n),
        };
        for i in 0..n {
            for j in 0..n {
                let c = i * n + j;
                out.a[i][j] = jet.value[c];
                for k in 0..n {
                    out.da[i][j][k] = d1[[c, k]];
                    for l in 0..n {
                        out.dda[i][j][k][l] = d2[[c, k, l]];
                    }
                }
            }
            let c = n * n + i;
            out.b[i] = jet.value[c];
            for j in 0..n {
                out.db[i][j] = d1[[c, j]];
                for k in 0..n {
                    out.ddb[i][j][k] = d2[[c, j, k]];
                }
            }
        }
        out
    }

    pub fn evaluate(spec: &MetricSpec, x: &[f64], backend: Backend) -> Result<ComponentJet> {
        let jet = evaluate_jet(spec, x, 2, backend)?;
        Ok(ComponentJet::from_jet(spec.n, &jet))
    }
}

impl AlphaData {
    pub fn from_components(x: &[f64], c: &ComponentJet) -> Result<AlphaData> {
        let n = c.n;
        let (a_inv, det_a) =
            linalg::inverse_det(&c.a).ok_or_else(|| Error::Singular(format!("a_ij at {x:?}")))?;
        // Γ_ljk = ½(∂_k a_lj + ∂_j a_lk − ∂_l a_jk) and its derivative.
        let mut gamma_low = zeros3(n);
        let mut d_gamma_low = zeros4(n);
        for l in 0..n {
            for j in 0..n {
                for k in 0..n {
                    gamma_low[l][j][k] = 0.5 * (c.da[l][j][k] + c.da[l][k][j] - c.da[j][k][l]);
                    for m in 0..n {
                        d_gamma_low[l][j][k][m] =
                            0.5 * (c.dda[l][j][k][m] + c.dda[l][k][j][m] - c.dda[j][k][l][m]);
                    }
                }
            }
        }
        // ∂_m a^il = −a^ip ∂_m a_pq a^ql
        let mut d_inv = zeros3(n);
        for i in 0..n {
            for l in 0..n {
                for m in 0..n {
                    let mut s = 0.0;
                    for p in 0..n {
                        for q in 0..n {
                            s += a_inv[i][p] * c.da[p][q][m] * a_inv[q][l];
                        }
                    }
                    d_inv[i][l][m] = -s;
                }
            }
        }
        let mut conn = zeros3(n);
        let mut d_conn = zeros4(n);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    conn[i][j][k] = (0..n).map(|l| a_inv[i][l] * gamma_low[l][j][k]).sum();
                    for m in 0..n {
                        d_conn[i][j][k][m] = (0..n)
                            .map(|l| {
                                d_inv[i][l][m] * gamma_low[l][j][k]
                                    + a_inv[i][l] * d_gamma_low[l][j][k][m]
                            })
                            .sum();
                    }
                }
            }
        }
        let mut riemann = zeros4(n);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let mut v = d_conn[i][j][l][k] - d_conn[i][j][k][l];
                        for m in 0..n {
                            v += conn[i][k][m] * conn[m][j][l] - conn[i][l][m] * conn[m][j][k];
                        }
                        riemann[i][j][k][l] = v;
                    }
                }
            }
        }
        Ok(AlphaData::assemble(
            x,
            c.a.clone(),
            a_inv,
            det_a,
            conn,
            d_conn,
            riemann,
            false,
        ))
    }

    #[allow(clippy::too_many_arguments)]
    pub(crate) fn assemble(
        x: &[f64],
        a: Vec<Vec<f64>>,
        a_inv: Vec<Vec<f64>>,
        det_a: f64,
        conn: Vec<Vec<Vec<f64>>>,
        d_conn: Vec<Vec<Vec<Vec<f64>>>>,
        riemann: Vec<Vec<Vec<Vec<f64>>>>,
        frame: bool,
    ) -> AlphaData {
        let n = a.len();
        let mut riemann_lower = zeros4(n);
        let mut ricci = zeros2(n);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        riemann_lower[i][j][k][l] =
                            (0..n).map(|m| a[i][m] * riemann[m][j][k][l]).sum();
                    }
                }
            }
        }
        for j in 0..n {
            for l in 0..n {
                ricci[j][l] = (0..n).map(|i| riemann[i][j][i][l]).sum();
            }
        }
        AlphaData {
            n,
            point: x.to_vec(),
            a,
            a_inv,
            det_a,
            conn,
            d_conn,
            riemann,
            riemann_lower,
            ricci,
            frame,
        }
    }

    /// `Ric_α(u, v)`.
    pub fn ricci_form(&self, u: &[f64], v: &[f64]) -> f64 {
        linalg::bilinear(&self.ricci, u, v)
    }

    /// `α(y) = sqrt(a_ij y^i y^j)`.
    pub fn norm(&self, y: &[f64]) -> f64 {
        linalg::bilinear(&self.a, y, y).sqrt()
    }

    pub fn lower(&self, v: &[f64]) -> Vec<f64> {
        linalg::mat_vec(&self.a, v)
    }

    pub fn raise(&self, v: &[f64]) -> Vec<f64> {
        linalg::mat_vec(&self.a_inv, v)
    }

    /// `max |R^i_jkl + R^i_klj + R^i_ljk|` (first Bianchi identity).
    pub fn bianchi_residual(&self) -> f64 {
        let n = self.n;
        let r = &self.riemann;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        worst = worst.max((r[i][j][k][l] + r[i][k][l][j] + r[i][l][j][k]).abs());
                    }
                }
            }
        }
        worst
    }

    /// Largest violation of the tensor symmetries `R^i_jkl = −R^i_jlk` and
    /// `Ric_jl = Ric_lj`.
    pub fn symmetry_residual(&self) -> f64 {
        let n = self.n;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                worst = worst.max((self.ricci[i][j] - self.ricci[j][i]).abs());
                for k in 0..n {
                    for l in 0..n {
                        worst =
                            worst.max((self.riemann[i][j][k][l] + self.riemann[i][j][l][k]).abs());
                    }
                }
            }
        }
        worst
    }
}

/// Riemannian data of the metric's `α` at `x`.
pub fn alpha_at(spec: &MetricSpec, x: &[f64]) -> Result<AlphaData> {
    alpha_at_with(spec, x, Backend::Dual)
}

pub fn alpha_at_with(spec: &MetricSpec, x: &[f64], backend: Backend) -> Result<AlphaData> {
    let c = ComponentJet::evaluate(spec, x, backend)?;
    AlphaData::from_components(x, &c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metricdsl::{parse, Expr};

    fn spec(a: [[&str; 2]; 2]) -> MetricSpec {
        let a: Vec<Vec<Expr>> = a
            .iter()
            .map(|r| r.iter().map(|s| parse(s).unwrap()).collect())
            .collect();
        MetricSpec::from_parts(
            "t",
            a,
            vec![Expr::Const(0.0); 2],
            vec![(0.1, 3.0), (-3.0, 3.0)],
        )
        .unwrap()
    }

    #[test]
    fn euclidean_is_flat() {
        let s = spec([["1", "0"], ["0", "1"]]);
        let al = alpha_at(&s, &[0.5, 0.2]).unwrap();
        assert!(al.conn.iter().flatten().flatten().all(|v| *v == 0.0));
        assert!(al.ricci.iter().flatten().all(|v| *v == 0.0));
    }

    #[test]
    fn unit_sphere_is_einstein() {
        let s = spec([["1", "0"], ["0", "sin(x1)^2"]]);
        let x1 = std::f64::consts::FRAC_PI_3;
        let al = alpha_at(&s, &[x1, 0.3]).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!((al.ricci[i][j] - al.a[i][j]).abs() < 1e-12);
            }
        }
        assert!(al.bianchi_residual() < 1e-14);
    }
}
