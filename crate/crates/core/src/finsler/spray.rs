use std::sync::Arc;

use crate::diffcore::linalg::{self, Matrix};
use crate::diffcore::{dot, evaluate_jet, sum, Backend, Layout, Scalar, Taylor};
use crate::error::{Error, EvalError, Result};
use crate::metricdsl::MetricSpec;
use crate::riemann::{beta_from_components, AlphaData, BetaData, ComponentJet};

use super::phi::{phi_machinery, PhiFunction};

/// An (α,β)-metric `F = α φ(β/α)` whose `α` and `β` come from a metric spec.
#[derive(Debug, Clone)]
pub struct FinslerMetric {
    pub spec: MetricSpec,
    pub phi: PhiFunction,
}

/// `F = α φ(β/α)` over any scalar tower.
pub fn finsler_function<T: Scalar>(
    phi: &PhiFunction,
    a: &[Vec<T>],
    b: &[T],
    y: &[T],
) -> std::result::Result<T, EvalError> {
    let alpha = linalg::bilinear(a, y, y).sqrt();
    let beta = dot(b, y);
    match phi {
        PhiFunction::Randers => Ok(alpha + beta),
        PhiFunction::Custom(_) => {
            let s = beta / alpha.clone();
            Ok(alpha * phi.eval(s)?)
        }
    }
}

impl FinslerMetric {
    pub fn randers(spec: MetricSpec) -> FinslerMetric {
        FinslerMetric {
            spec,
            phi: PhiFunction::Randers,
        }
    }

    pub fn n(&self) -> usize {
        self.spec.n
    }

    pub fn is_randers(&self) -> bool {
        self.phi.is_randers()
    }

    /// `F(x, y)`.
    pub fn eval(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        let (a, b) = self.spec.components(x)?;
        Ok(finsler_function(&self.phi, &a, &b, y)?)
    }
}

pub(crate) const REGULARITY: f64 = 1e-10;

pub(crate) fn check_direction(x: &[f64], y: &[f64]) -> Result<()> {
    let ynorm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
    let xnorm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if !(ynorm >= 1e-8 * (1.0 + xnorm)) {
        return Err(Error::DegenerateDirection { norm: ynorm });
    }
    Ok(())
}

/// Taylor series in `x` of `a_ij` and `b_i` around a point. With the
/// finite-difference backend the series stops at second order, which is
/// all the curvature formulas consume.
fn component_series(
    spec: &MetricSpec,
    x: &[f64],
    order: usize,
    backend: Backend,
) -> Result<(Vec<Vec<Taylor>>, Vec<Taylor>)> {
    let n = spec.n;
    match backend {
        Backend::Dual => Ok(spec.components(&Taylor::seed(x, order))?),
        Backend::FiniteDifference => {
            let jet = evaluate_jet(spec, x, 2, backend)?;
            let layout = Layout::get(n, order);
            let (d1, d2) = (jet.d1.as_ref().unwrap(), jet.d2.as_ref().unwrap());
            let series = |c: usize| {
                Taylor::from_coefficients(&layout, order, |e| {
                    let vars: Vec<usize> = e
                        .iter()
                        .enumerate()
                        .flat_map(|(v, &p)| std::iter::repeat(v).take(p as usize))
                        .collect();
                    match vars.len() {
                        0 => jet.value[c],
                        1 => d1[[c, vars[0]]],
                        2 => {
                            let sym = if vars[0] == vars[1] { 0.5 } else { 1.0 };
                            d2[[c, vars[0], vars[1]]] * sym
                        }
                        _ => 0.0,
                    }
                })
            };
            let a = (0..n)
                .map(|i| (0..n).map(|j| series(i * n + j)).collect())
                .collect();
            let b = (0..n).map(|i| series(n * n + i)).collect();
            Ok((a, b))
        }
    }
}

fn component_jet(a: &[Vec<Taylor>], b: &[Taylor]) -> ComponentJet {
    let n = b.len();
    let grid2 = |f: &dyn Fn(usize, usize) -> f64| -> Vec<Vec<f64>> {
        (0..n).map(|i| (0..n).map(|j| f(i, j)).collect()).collect()
    };
    ComponentJet {
        n,
        a: grid2(&|i, j| a[i][j].value()),
        da: (0..n)
            .map(|i| grid2(&|j, k| a[i][j].partial(&[k])))
            .collect(),
        dda: (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| grid2(&|k, l| a[i][j].partial(&[k, l])))
                    .collect()
            })
            .collect(),
        b: b.iter().map(|v| v.value()).collect(),
        db: grid2(&|i, j| b[i].partial(&[j])),
        ddb: (0..n)
            .map(|i| grid2(&|j, k| b[i].partial(&[j, k])))
            .collect(),
    }
}

/// Joint Taylor expansion of the spray around `(x, y)`.
///
/// Variables `0..n` are the `x^i`, variables `n..2n` the `y^i`. The spray
/// series has total order `order`; `F²` is expanded two orders higher.
pub struct SprayJet {
    pub n: usize,
    pub order: usize,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub backend: Backend,
    pub alpha: AlphaData,
    pub beta: BetaData,
    layout: Arc<Layout>,
    xs: Vec<Taylor>,
    ys: Vec<Taylor>,
    b2: Taylor,
    f: Taylor,
    g: Vec<Vec<Taylor>>,
    spray: Vec<Taylor>,
    ln_sigma: Option<Taylor>,
}

impl SprayJet {
    pub fn new(
        metric: &FinslerMetric,
        x: &[f64],
        y: &[f64],
        order: usize,
        backend: Backend,
    ) -> Result<SprayJet> {
        let n = metric.n();
        if x.len() != n || y.len() != n {
            return Err(Error::ArityMismatch {
                expected: n,
                got: if x.len() != n { x.len() } else { y.len() },
            });
        }
        check_direction(x, y)?;
        let top = order + 2;
        let (a_x, b_x) = component_series(&metric.spec, x, top, backend)?;
        let comp = component_jet(&a_x, &b_x);
        let alpha = AlphaData::from_components(x, &comp)?;
        let beta = beta_from_components(&alpha, &comp);

        if metric.is_randers() && beta.b2 >= 1.0 {
            return Err(Error::RandersNorm {
                point: x.to_vec(),
                norm: beta.b2.sqrt(),
            });
        }
        let alpha_y = alpha.norm(y);
        let s = beta.b.iter().zip(y).map(|(b, v)| b * v).sum::<f64>() / alpha_y;
        phi_machinery(&metric.phi, s, beta.b2, n)?;

        let layout = Layout::get(2 * n, top);
        let map: Vec<usize> = (0..n).collect();
        let a: Vec<Vec<Taylor>> = a_x
            .iter()
            .map(|r| r.iter().map(|v| v.embed(&layout, &map)).collect())
            .collect();
        let b: Vec<Taylor> = b_x.iter().map(|v| v.embed(&layout, &map)).collect();
        let ys: Vec<Taylor> = (0..n)
            .map(|i| Taylor::variable(&layout, top, n + i, y[i]))
            .collect();

        let f = finsler_function(&metric.phi, &a, &b, &ys)?;
        if !(f.value() > REGULARITY) {
            return Err(Error::Irregular(format!(
                "F = {} at x = {x:?}, y = {y:?}",
                f.value()
            )));
        }
        let l = f.clone() * f.clone();
        let ly: Vec<Taylor> = (0..n).map(|i| l.diff(n + i)).collect();
        let g: Vec<Vec<Taylor>> = (0..n)
            .map(|i| (0..n).map(|j| ly[i].diff(n + j).scale(0.5)).collect())
            .collect();
        let rhs: Vec<Taylor> = (0..n)
            .map(|l_| {
                let mixed = sum((0..n).map(|m| ly[l_].diff(m) * ys[m].clone()));
                (mixed - l.diff(l_)).scale(0.25)
            })
            .collect();
        let spray = linalg::solve(&g, &rhs)
            .ok_or_else(|| Error::Singular(format!("g_ij at x = {x:?}, y = {y:?}")))?;

        let b_up = linalg::solve(&a_x, &b_x).ok_or_else(|| Error::Singular("a_ij".into()))?;
        let b2 = dot(&b_x, &b_up);
        let ln_sigma = if metric.is_randers() {
            let (_, det) =
                linalg::inverse_det(&a_x).ok_or_else(|| Error::Singular("a_ij".into()))?;
            let ln = (b2.clone().scale(-1.0).offset(1.0))
                .ln()
                .scale((n as f64 + 1.0) / 2.0)
                + det.ln().scale(0.5);
            Some(ln.embed(&layout, &map))
        } else {
            None
        };
        let b2 = b2.embed(&layout, &map);
        let xs: Vec<Taylor> = (0..n)
            .map(|i| Taylor::variable(&layout, top, i, x[i]))
            .collect();

        Ok(SprayJet {
            n,
            order,
            x: x.to_vec(),
            y: y.to_vec(),
            backend,
            alpha,
            beta,
            layout,
            xs,
            ys,
            b2,
            f: f.truncate(top),
            g,
            spray,
            ln_sigma,
        })
    }

    pub fn layout(&self) -> &Arc<Layout> {
        &self.layout
    }

    /// Series of the coordinate `x^i`.
    pub fn x_var(&self, i: usize) -> &Taylor {
        &self.xs[i]
    }

    pub fn x_vars(&self) -> &[Taylor] {
        &self.xs
    }

    pub fn y_vars(&self) -> &[Taylor] {
        &self.ys
    }

    /// Series in `x` of `b² = a^ij b_i b_j`.
    pub fn b2_series(&self) -> &Taylor {
        &self.b2
    }

    /// Series of the coordinate `y^i`.
    pub fn y_var(&self, i: usize) -> &Taylor {
        &self.ys[i]
    }

    pub fn f(&self) -> f64 {
        self.f.value()
    }

    pub fn f_series(&self) -> &Taylor {
        &self.f
    }

    /// `F_{y^k}`.
    pub fn f_y(&self) -> Vec<f64> {
        (0..self.n).map(|k| self.f.partial(&[self.n + k])).collect()
    }

    pub fn g_series(&self) -> &[Vec<Taylor>] {
        &self.g
    }

    pub fn g(&self) -> Matrix<f64> {
        linalg::to_f64(&self.g)
    }

    pub fn spray_series(&self) -> &[Taylor] {
        &self.spray
    }

    /// `G^i`.
    pub fn spray(&self) -> Vec<f64> {
        self.spray.iter().map(|v| v.value()).collect()
    }

    /// `N^i_j = ∂G^i/∂y^j`.
    pub fn connection(&self) -> Matrix<f64> {
        let n = self.n;
        (0..n)
            .map(|i| (0..n).map(|j| self.spray[i].partial(&[n + j])).collect())
            .collect()
    }

    /// `∂²G^i/∂y^j∂y^k`, indexed `[i][j][k]`.
    pub fn spray_yy(&self) -> Vec<Matrix<f64>> {
        let n = self.n;
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        (0..n)
                            .map(|k| self.spray[i].partial(&[n + j, n + k]))
                            .collect()
                    })
                    .collect()
            })
            .collect()
    }

    /// `∂³G^i/∂y^j∂y^k∂y^l`, indexed `[i][j][k][l]`; needs order ≥ 3.
    pub fn spray_yyy(&self) -> Vec<Vec<Matrix<f64>>> {
        let n = self.n;
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        (0..n)
                            .map(|k| {
                                (0..n)
                                    .map(|l| self.spray[i].partial(&[n + j, n + k, n + l]))
                                    .collect()
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect()
    }

    /// `∂G^i/∂x^k`.
    pub fn spray_x(&self) -> Matrix<f64> {
        let n = self.n;
        (0..n)
            .map(|i| (0..n).map(|k| self.spray[i].partial(&[k])).collect())
            .collect()
    }

    /// `Ḡ^i = ½ Γ^i_jk y^j y^k` of `α`.
    pub fn alpha_spray(&self) -> Vec<f64> {
        alpha_spray(&self.alpha, &self.y)
    }

    /// `N̄^i_j = Γ^i_jk y^k`.
    pub fn alpha_connection(&self) -> Matrix<f64> {
        alpha_connection(&self.alpha, &self.y)
    }

    fn require(&self, order: usize, what: &str) -> Result<()> {
        if self.order < order {
            return Err(Error::InvalidParameter(format!(
                "{what} needs a spray jet of order {order}, got {}",
                self.order
            )));
        }
        Ok(())
    }

    /// Series of `R^i_k`, of order `order − 2`.
    pub fn riemann_series(&self) -> Result<Vec<Vec<Taylor>>> {
        self.require(2, "R^i_k")?;
        let n = self.n;
        let g = &self.spray;
        let gy: Vec<Vec<Taylor>> = (0..n)
            .map(|i| (0..n).map(|m| g[i].diff(n + m)).collect())
            .collect();
        let out = (0..n)
            .map(|i| {
                (0..n)
                    .map(|k| {
                        let t1 = g[i].diff(k).scale(2.0);
                        let t2 = sum((0..n).map(|m| self.ys[m].clone() * g[i].diff(m).diff(n + k)));
                        let t3 =
                            sum((0..n).map(|m| g[m].clone() * gy[i][m].diff(n + k))).scale(2.0);
                        let t4 = sum((0..n).map(|m| gy[i][m].clone() * gy[m][k].clone()));
                        (t1 - t2 + t3 - t4).truncate(self.order - 2)
                    })
                    .collect()
            })
            .collect();
        Ok(out)
    }

    /// `R^i_k`.
    pub fn riemann(&self) -> Result<Matrix<f64>> {
        Ok(linalg::to_f64(&self.riemann_series()?))
    }

    /// Series of `log σ_BH(x)` (Randers only).
    pub fn ln_sigma_series(&self) -> Result<&Taylor> {
        self.ln_sigma.as_ref().ok_or_else(|| {
            Error::NotApplicable("closed-form volume density needs a Randers metric".into())
        })
    }

    /// Series of `S = ∂G^m/∂y^m − y^m ∂_m log σ_BH`, of order `order − 1`.
    pub fn s_curvature_series(&self) -> Result<Taylor> {
        self.require(1, "S")?;
        let n = self.n;
        let ln_sigma = self.ln_sigma_series()?;
        let trace = sum((0..n).map(|m| self.spray[m].diff(n + m)));
        let drift = sum((0..n).map(|m| self.ys[m].clone() * ln_sigma.diff(m)));
        Ok(trace - drift)
    }

    /// Series of `τ = log(√det g / σ_BH)`, of order `order`.
    pub fn distortion_series(&self) -> Result<Taylor> {
        let (_, det) =
            linalg::inverse_det(&self.g).ok_or_else(|| Error::Singular("g_ij".into()))?;
        Ok(det.ln().scale(0.5) - self.ln_sigma_series()?.clone())
    }

    /// Inverse of the fundamental tensor as a series of order `order`.
    pub fn g_inverse_series(&self) -> Result<Vec<Vec<Taylor>>> {
        Ok(linalg::inverse_det(&self.g)
            .ok_or_else(|| Error::Singular("g_ij".into()))?
            .0)
    }

    /// Series of `L_ijk = −½ F F_{y^m} ∂³G^m/∂y^i∂y^j∂y^k`, of order `order − 3`.
    pub fn landsberg_series(&self) -> Result<Vec<Vec<Vec<Taylor>>>> {
        self.require(3, "L_ijk")?;
        let n = self.n;
        let keep = self.order - 3;
        let f = self.f.truncate(keep);
        let f_y: Vec<Taylor> = (0..n).map(|m| self.f.diff(n + m).truncate(keep)).collect();
        let weight: Vec<Taylor> = f_y
            .iter()
            .map(|v| (f.clone() * v.clone()).scale(-0.5))
            .collect();
        let mut out = vec![vec![vec![Taylor::Const(0.0); n]; n]; n];
        for i in 0..n {
            for j in i..n {
                for k in j..n {
                    let v = sum((0..n).map(|m| {
                        weight[m].clone() * self.spray[m].diff(n + i).diff(n + j).diff(n + k)
                    }));
                    for (p, q, r) in [
                        (i, j, k),
                        (i, k, j),
                        (j, i, k),
                        (j, k, i),
                        (k, i, j),
                        (k, j, i),
                    ] {
                        out[p][q][r] = v.clone();
                    }
                }
            }
        }
        Ok(out)
    }

    /// Series of `J_k = g^ij L_ijk`, of order `order − 3`.
    pub fn mean_landsberg_series(&self) -> Result<Vec<Taylor>> {
        let l = self.landsberg_series()?;
        let g_inv = self.g_inverse_series()?;
        let n = self.n;
        Ok((0..n)
            .map(|k| {
                sum((0..n)
                    .flat_map(|i| (0..n).map(move |j| (i, j)))
                    .map(|(i, j)| g_inv[i][j].clone() * l[i][j][k].clone()))
            })
            .collect())
    }
}

/// `Ḡ^i = ½ conn[i][j][k] y^j y^k`.
pub fn alpha_spray(alpha: &AlphaData, y: &[f64]) -> Vec<f64> {
    let n = alpha.n;
    (0..n)
        .map(|i| {
            let mut v = 0.0;
            for j in 0..n {
                for k in 0..n {
                    v += alpha.conn[i][j][k] * y[j] * y[k];
                }
            }
            0.5 * v
        })
        .collect()
}

/// `N̄^i_j = ∂Ḡ^i/∂y^j`.
pub fn alpha_connection(alpha: &AlphaData, y: &[f64]) -> Matrix<f64> {
    let n = alpha.n;
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    (0..n)
                        .map(|k| 0.5 * (alpha.conn[i][j][k] + alpha.conn[i][k][j]) * y[k])
                        .sum()
                })
                .collect()
        })
        .collect()
}
