//! Small dense linear algebra over any [`Scalar`], so that inverses and
//! determinants of jet-valued matrices carry their derivatives along.

use super::Scalar;

pub type Matrix<T> = Vec<Vec<T>>;

/// LU factorisation with partial pivoting (pivot chosen on primal values).
struct Lu<T> {
    lu: Matrix<T>,
    perm: Vec<usize>,
    sign: f64,
}

fn factor<T: Scalar>(m: &[Vec<T>]) -> Option<Lu<T>> {
    let n = m.len();
    let mut lu: Matrix<T> = m.to_vec();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut sign = 1.0;
    let scale = m
        .iter()
        .flat_map(|r| r.iter().map(|v| v.value().abs()))
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    for k in 0..n {
        let p = (k..n)
            .max_by(|&a, &b| lu[a][k].value().abs().total_cmp(&lu[b][k].value().abs()))
            .unwrap_or(k);
        if lu[p][k].value().abs() <= 1e-14 * scale {
            return None;
        }
        if p != k {
            lu.swap(p, k);
            perm.swap(p, k);
            sign = -sign;
        }
        let inv = lu[k][k].clone().recip();
        for i in k + 1..n {
            let f = lu[i][k].clone() * inv.clone();
            for j in k + 1..n {
                let t = f.clone() * lu[k][j].clone();
                lu[i][j] = lu[i][j].clone() - t;
            }
            lu[i][k] = f;
        }
    }
    Some(Lu { lu, perm, sign })
}

impl<T: Scalar> Lu<T> {
    fn solve(&self, rhs: &[T]) -> Vec<T> {
        let n = self.lu.len();
        let mut x: Vec<T> = self.perm.iter().map(|&p| rhs[p].clone()).collect();
        for i in 0..n {
            for j in 0..i {
                let t = self.lu[i][j].clone() * x[j].clone();
                x[i] = x[i].clone() - t;
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                let t = self.lu[i][j].clone() * x[j].clone();
                x[i] = x[i].clone() - t;
            }
            x[i] = x[i].clone() / self.lu[i][i].clone();
        }
        x
    }

    fn det(&self) -> T {
        let mut d = T::from_f64(self.sign);
        for i in 0..self.lu.len() {
            d = d * self.lu[i][i].clone();
        }
        d
    }
}

/// Inverse and determinant, or `None` when the matrix is numerically singular.
pub fn inverse_det<T: Scalar>(m: &[Vec<T>]) -> Option<(Matrix<T>, T)> {
    let n = m.len();
    let lu = factor(m)?;
    let mut inv: Matrix<T> = vec![vec![T::zero(); n]; n];
    for j in 0..n {
        let mut e = vec![T::zero(); n];
        e[j] = T::one();
        let col = lu.solve(&e);
        for (i, v) in col.into_iter().enumerate() {
            inv[i][j] = v;
        }
    }
    Some((inv, lu.det()))
}

pub fn solve<T: Scalar>(m: &[Vec<T>], rhs: &[T]) -> Option<Vec<T>> {
    Some(factor(m)?.solve(rhs))
}

pub fn mat_vec<T: Scalar>(m: &[Vec<T>], v: &[T]) -> Vec<T> {
    m.iter().map(|row| super::dot(row, v)).collect()
}

/// `u^T m v`.
pub fn bilinear<T: Scalar>(m: &[Vec<T>], u: &[T], v: &[T]) -> T {
    super::dot(u, &mat_vec(m, v))
}

pub fn to_f64(m: &[Vec<impl Scalar>]) -> Matrix<f64> {
    m.iter()
        .map(|r| r.iter().map(|v| v.value()).collect())
        .collect()
}
