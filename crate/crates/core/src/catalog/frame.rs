//! Orthonormal moving frames with constant connection tables.

use num_rational::Ratio;

use super::surd::{Rational, Surd, SurdField};
use crate::error::{Error, Result};
use crate::riemann::{AlphaData, BetaData, CovariantInput, Ring};

/// A left- or right-invariant Riemannian metric described in an orthonormal
/// frame `e_i` with dual coframe `ω^i`, together with a frame-constant 1-form
/// `β = b_i ω^i`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameSpace {
    pub n: usize,
    pub field: SurdField,
    /// `structure[i][j][k] = dω^i(e_j, e_k)`.
    pub structure: Vec<Vec<Vec<Surd>>>,
    /// `connection[i][j][k] = γ^i_jk = ω_j^i(e_k)`.
    pub connection: Vec<Vec<Vec<Surd>>>,
    pub b: Vec<Surd>,
}

/// A frame-constant covariant tensor, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameTensor {
    pub n: usize,
    pub rank: usize,
    pub data: Vec<Surd>,
}

impl FrameTensor {
    pub fn zeros(n: usize, rank: usize) -> FrameTensor {
        FrameTensor {
            n,
            rank,
            data: vec![Surd::zero(); n.pow(rank as u32)],
        }
    }

    pub fn from_vector(v: &[Surd]) -> FrameTensor {
        FrameTensor {
            n: v.len(),
            rank: 1,
            data: v.to_vec(),
        }
    }

    pub fn from_matrix(m: &[Vec<Surd>]) -> FrameTensor {
        FrameTensor {
            n: m.len(),
            rank: 2,
            data: m.iter().flatten().copied().collect(),
        }
    }

    fn offset(&self, idx: &[usize]) -> usize {
        idx.iter().fold(0, |acc, &i| acc * self.n + i)
    }

    pub fn get(&self, idx: &[usize]) -> Surd {
        self.data[self.offset(idx)]
    }

    pub fn set(&mut self, idx: &[usize], v: Surd) {
        let k = self.offset(idx);
        self.data[k] = v;
    }

    /// Every multi-index in row-major order.
    pub fn indices(&self) -> Vec<Vec<usize>> {
        (0..self.data.len())
            .map(|mut k| {
                let mut idx = vec![0; self.rank];
                for slot in (0..self.rank).rev() {
                    idx[slot] = k % self.n;
                    k /= self.n;
                }
                idx
            })
            .collect()
    }
}

/// `T_{i₁…i_r;k} = −Σ_slots T_{…p…} γ^p_{i_slot k}`: the derivative of a
/// frame-constant tensor in the direction `e_k` is pure connection.
pub fn frame_covariant_derivative(
    space: &FrameSpace,
    t: &FrameTensor,
    direction: usize,
) -> Result<FrameTensor> {
    if t.n != space.n || direction >= space.n {
        return Err(Error::ArityMismatch {
            expected: space.n,
            got: t.n.max(direction + 1),
        });
    }
    let mut out = FrameTensor::zeros(t.n, t.rank);
    for idx in out.indices() {
        let mut v = Surd::zero();
        for slot in 0..t.rank {
            let mut j = idx.clone();
            for p in 0..t.n {
                j[slot] = p;
                v = v - t.get(&j) * space.connection[p][idx[slot]][direction];
            }
        }
        out.set(&idx, v);
    }
    Ok(out)
}

/// The full covariant differential, with the derivative index last.
pub fn frame_covariant_differential(space: &FrameSpace, t: &FrameTensor) -> Result<FrameTensor> {
    let mut out = FrameTensor::zeros(t.n, t.rank + 1);
    for k in 0..t.n {
        let d = frame_covariant_derivative(space, t, k)?;
        for idx in d.indices() {
            let mut full = idx.clone();
            full.push(k);
            out.set(&full, d.get(&idx));
        }
    }
    Ok(out)
}

fn zero3(n: usize) -> Vec<Vec<Vec<Surd>>> {
    vec![vec![vec![Surd::zero(); n]; n]; n]
}

impl FrameSpace {
    /// Metric compatibility `γ^i_jk = −γ^j_ik`, the structure equations
    /// `dω^i(e_j, e_k) = γ^i_jk − γ^i_kj`, and `|β| < 1`.
    pub fn validate(&self) -> Result<()> {
        let n = self.n;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let g = &self.connection;
                    if g[i][j][k] != -g[j][i][k] {
                        return Err(Error::InvalidSpec(format!(
                            "connection is not metric: γ^{}_{}{} = {}",
                            i + 1,
                            j + 1,
                            k + 1,
                            g[i][j][k]
                        )));
                    }
                    if self.structure[i][j][k] != g[i][j][k] - g[i][k][j] {
                        return Err(Error::InvalidSpec(format!(
                            "structure equation for dω^{} fails on (e_{}, e_{})",
                            i + 1,
                            j + 1,
                            k + 1
                        )));
                    }
                }
            }
        }
        let b2 = self.b2().to_f64();
        if b2 >= 1.0 {
            return Err(Error::RandersNorm {
                point: vec![],
                norm: b2.sqrt(),
            });
        }
        Ok(())
    }

    pub fn b2(&self) -> Surd {
        self.b.iter().fold(Surd::zero(), |acc, v| acc + *v * *v)
    }

    /// `R^i_jkl = γ^i_mk γ^m_jl − γ^i_ml γ^m_jk + dω^m(e_k, e_l) γ^i_jm`.
    pub fn riemann(&self) -> Vec<Vec<Vec<Vec<Surd>>>> {
        let n = self.n;
        let g = &self.connection;
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        (0..n)
                            .map(|k| {
                                (0..n)
                                    .map(|l| {
                                        (0..n).fold(Surd::zero(), |acc, m| {
                                            acc + g[i][m][k] * g[m][j][l] - g[i][m][l] * g[m][j][k]
                                                + self.structure[m][k][l] * g[i][j][m]
                                        })
                                    })
                                    .collect()
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect()
    }

    pub fn covariant_input(&self) -> CovariantInput<Surd> {
        let n = self.n;
        let identity = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| Surd::from_ratio((i == j) as i64, 1))
                    .collect()
            })
            .collect();
        CovariantInput {
            a_inv: identity,
            conn: self.connection.clone(),
            d_conn: vec![zero3(n); n],
            b: self.b.clone(),
            db: vec![vec![Surd::zero(); n]; n],
            ddb: zero3(n),
        }
    }

    /// All `β`-tensors in exact arithmetic.
    pub fn beta_exact(&self) -> BetaData<Surd> {
        BetaData::compute(&self.covariant_input())
    }

    pub fn beta_data(&self) -> BetaData {
        self.beta_exact().map(Surd::to_f64)
    }

    /// `α`-data in the frame. The space is homogeneous, so the point is
    /// only a label.
    pub fn alpha_data(&self) -> AlphaData {
        let n = self.n;
        let eye: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| (i == j) as u8 as f64).collect())
            .collect();
        let f3 = |t: &Vec<Vec<Vec<Surd>>>| -> Vec<Vec<Vec<f64>>> {
            t.iter()
                .map(|a| {
                    a.iter()
                        .map(|b| b.iter().map(Surd::to_f64).collect())
                        .collect()
                })
                .collect()
        };
        let riemann = self.riemann().iter().map(f3).collect();
        AlphaData::assemble(
            &vec![0.0; n],
            eye.clone(),
            eye,
            1.0,
            f3(&self.connection),
            vec![vec![vec![vec![0.0; n]; n]; n]; n],
            riemann,
            true,
        )
    }
}

/// `K` as an exact rational. Parameters are expected to be short decimals.
pub fn rational_parameter(name: &str, v: f64) -> Result<Rational> {
    Ratio::<i64>::approximate_float(v)
        .filter(|r| (*r.numer() as f64 / *r.denom() as f64 - v).abs() <= 1e-12 * v.abs().max(1.0))
        .ok_or_else(|| Error::InvalidParameter(format!("{name} = {v} has no exact rational form")))
}

/// The Berger-sphere frame of `S³` with `ω¹ = εη¹`, `ω² = η²`, `ω³ = η³`
/// and `β = (δ/ε) ω¹`, where `ε = √K`, `δ = ±√(K − 1)`.
pub fn bao_shen_frame(k: f64, delta_sign: i8) -> Result<FrameSpace> {
    if !(k > 1.0) || !k.is_finite() {
        return Err(Error::InvalidParameter(format!("need K > 1, got {k}")));
    }
    if delta_sign != 1 && delta_sign != -1 {
        return Err(Error::InvalidParameter(format!(
            "sign must be ±1, got {delta_sign}"
        )));
    }
    let field = SurdField {
        k: rational_parameter("K", k)?,
        delta_sign,
    };
    let (eps, delta) = (field.epsilon(), field.delta());
    // 1/ε = ε/K
    let inv_eps = eps * field.rational(Rational::from(1) / field.k);
    let two = Surd::from_ratio(2, 1);
    let mut structure = zero3(3);
    let mut put = |i: usize, j: usize, k: usize, v: Surd| {
        structure[i][j][k] = v;
        structure[i][k][j] = -v;
    };
    put(0, 1, 2, two * eps);
    put(1, 2, 0, two * inv_eps);
    put(2, 0, 1, two * inv_eps);
    // connection[i][j][k]: ω_j^i has a component along ω^k
    let mut connection = zero3(3);
    connection[1][0][2] = -eps;
    connection[2][0][1] = eps;
    connection[0][1][2] = eps;
    connection[2][1][0] = eps - two * inv_eps;
    connection[0][2][1] = -eps;
    connection[1][2][0] = two * inv_eps - eps;
    let space = FrameSpace {
        n: 3,
        field,
        structure,
        connection,
        b: vec![delta * inv_eps, Surd::zero(), Surd::zero()],
    };
    space.validate()?;
    Ok(space)
}
