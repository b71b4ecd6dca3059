use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::expr::Expr;
use super::parser::parse_for;
use crate::diffcore::{Scalar, SmoothMap};
use crate::error::{Error, EvalError, Result};

/// Seed of the uniform samples used by [`MetricSpec::validate`].
pub const VALIDATION_SEED: u64 = 0x5EED_0001;
pub const VALIDATION_LATTICE: usize = 5;
pub const VALIDATION_SAMPLES: usize = 100;

/// On-disk form of a metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricDocument {
    pub name: String,
    pub n: usize,
    pub a: BTreeMap<String, String>,
    pub b: Vec<String>,
    pub domain: Vec<[f64; 2]>,
}

/// A Randers metric `a_ij(x) y^i y^j` and `b_i(x) y^i` given by expressions
/// on an axis-aligned box.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricSpec {
    pub name: String,
    pub n: usize,
    /// Full symmetric matrix of component expressions.
    pub a: Vec<Vec<Expr>>,
    pub b: Vec<Expr>,
    pub domain: Vec<(f64, f64)>,
}

fn component_key(key: &str, n: usize) -> Option<(usize, usize)> {
    let (i, j) = if let Some((l, r)) = key.split_once(',') {
        (l.trim().parse().ok()?, r.trim().parse().ok()?)
    } else if n <= 9 && key.len() == 2 {
        let b = key.as_bytes();
        (
            (b[0] as char).to_digit(10)? as usize,
            (b[1] as char).to_digit(10)? as usize,
        )
    } else {
        return None;
    };
    (1..=n).contains(&i).then_some(())?;
    (1..=n).contains(&j).then_some(())?;
    Some((i - 1, j - 1))
}

impl MetricSpec {
    /// Builds a spec from already-parsed expressions without validating it.
    pub fn from_parts(
        name: impl Into<String>,
        a: Vec<Vec<Expr>>,
        b: Vec<Expr>,
        domain: Vec<(f64, f64)>,
    ) -> Result<MetricSpec> {
        let n = b.len();
        if n < 2 {
            return Err(Error::InvalidSpec(format!(
                "dimension must be at least 2, got {n}"
            )));
        }
        if a.len() != n || a.iter().any(|r| r.len() != n) || domain.len() != n {
            return Err(Error::InvalidSpec("inconsistent component counts".into()));
        }
        for i in 0..n {
            for j in 0..i {
                if a[i][j] != a[j][i] {
                    return Err(Error::InvalidSpec(format!(
                        "a_{}{} is not symmetric",
                        j + 1,
                        i + 1
                    )));
                }
            }
        }
        for (k, &(lo, hi)) in domain.iter().enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::InvalidSpec(format!(
                    "domain interval {} is empty",
                    k + 1
                )));
            }
        }
        Ok(MetricSpec {
            name: name.into(),
            n,
            a,
            b,
            domain,
        })
    }

    /// Parses every component of a document (no positivity checks).
    pub fn from_document(doc: &MetricDocument) -> Result<MetricSpec> {
        let n = doc.n;
        if n < 2 {
            return Err(Error::InvalidSpec(format!(
                "dimension must be at least 2, got {n}"
            )));
        }
        if doc.b.len() != n {
            return Err(Error::InvalidSpec(format!(
                "expected {n} entries in b, got {}",
                doc.b.len()
            )));
        }
        if doc.domain.len() != n {
            return Err(Error::InvalidSpec(format!(
                "expected {n} domain intervals, got {}",
                doc.domain.len()
            )));
        }
        let mut a: Vec<Vec<Option<Expr>>> = vec![vec![None; n]; n];
        for (key, text) in &doc.a {
            let (i, j) = component_key(key, n)
                .ok_or_else(|| Error::InvalidSpec(format!("bad component key `{key}` in a")))?;
            if i > j {
                return Err(Error::InvalidSpec(format!(
                    "a key `{key}` is below the diagonal; give the upper triangle only"
                )));
            }
            if a[i][j].is_some() {
                return Err(Error::InvalidSpec(format!(
                    "a_{}{} given twice",
                    i + 1,
                    j + 1
                )));
            }
            let e = parse_for(text, n).map_err(|source| Error::Component {
                component: format!("a{}{}", i + 1, j + 1),
                source,
            })?;
            a[i][j] = Some(e);
        }
        let mut full = vec![vec![Expr::Const(0.0); n]; n];
        for i in 0..n {
            for j in i..n {
                match a[i][j].take() {
                    Some(e) => {
                        full[i][j] = e.clone();
                        full[j][i] = e;
                    }
                    None if i == j => {
                        return Err(Error::InvalidSpec(format!(
                            "missing diagonal entry a{}{}",
                            i + 1,
                            i + 1
                        )))
                    }
                    None => {}
                }
            }
        }
        let b = doc
            .b
            .iter()
            .enumerate()
            .map(|(i, text)| {
                parse_for(text, n).map_err(|source| Error::Component {
                    component: format!("b{}", i + 1),
                    source,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let domain = doc.domain.iter().map(|d| (d[0], d[1])).collect();
        MetricSpec::from_parts(doc.name.clone(), full, b, domain)
    }

    pub fn to_document(&self) -> MetricDocument {
        let mut a = BTreeMap::new();
        for i in 0..self.n {
            for j in i..self.n {
                if i == j || !self.a[i][j].is_zero() {
                    let key = if self.n <= 9 {
                        format!("{}{}", i + 1, j + 1)
                    } else {
                        format!("{},{}", i + 1, j + 1)
                    };
                    a.insert(key, self.a[i][j].to_string());
                }
            }
        }
        MetricDocument {
            name: self.name.clone(),
            n: self.n,
            a,
            b: self.b.iter().map(|e| e.to_string()).collect(),
            domain: self.domain.iter().map(|&(l, h)| [l, h]).collect(),
        }
    }

    pub fn from_json(text: &str) -> Result<MetricSpec> {
        let doc: MetricDocument = serde_json::from_str(text)?;
        let spec = MetricSpec::from_document(&doc)?;
        spec.validate()?;
        Ok(spec)
    }

    /// Evaluates `(a_ij, b_i)` at `x`.
    pub fn components<T: Scalar>(
        &self,
        x: &[T],
    ) -> std::result::Result<(Vec<Vec<T>>, Vec<T>), EvalError> {
        let n = self.n;
        let mut a = vec![vec![T::zero(); n]; n];
        for i in 0..n {
            for j in i..n {
                let v = self.a[i][j].eval(x)?;
                a[j][i] = v.clone();
                a[i][j] = v;
            }
        }
        let b = self
            .b
            .iter()
            .map(|e| e.eval(x))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Ok((a, b))
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.n
            && x.iter()
                .zip(&self.domain)
                .all(|(v, &(lo, hi))| *v >= lo && *v <= hi)
    }

    pub fn center(&self) -> Vec<f64> {
        self.domain.iter().map(|&(l, h)| 0.5 * (l + h)).collect()
    }

    /// Checks positivity of `a` and `|β|_α < 1` at one point.
    pub fn check_point(&self, x: &[f64]) -> Result<f64> {
        let (a, b) = self.components::<f64>(x)?;
        let n = self.n;
        let m = DMatrix::from_fn(n, n, |i, j| a[i][j]);
        let eig = m.clone().symmetric_eigen();
        let min = eig
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        if !(min > 0.0) {
            return Err(Error::NotPositiveDefinite {
                point: x.to_vec(),
                eigenvalue: min,
            });
        }
        let bv = DVector::from_vec(b);
        let chol = m.cholesky().ok_or_else(|| Error::NotPositiveDefinite {
            point: x.to_vec(),
            eigenvalue: min,
        })?;
        let norm = bv.dot(&chol.solve(&bv)).max(0.0).sqrt();
        if !(norm < 1.0) {
            return Err(Error::RandersNorm {
                point: x.to_vec(),
                norm,
            });
        }
        Ok(norm)
    }

    /// Points checked by [`validate`](Self::validate): a uniform lattice with
    /// `VALIDATION_LATTICE` nodes per axis followed by seeded uniform samples.
    pub fn validation_points(&self) -> Vec<Vec<f64>> {
        let n = self.n;
        let k = VALIDATION_LATTICE;
        let mut out = Vec::with_capacity(k.pow(n as u32) + VALIDATION_SAMPLES);
        let mut idx = vec![0usize; n];
        loop {
            out.push(
                idx.iter()
                    .zip(&self.domain)
                    .map(|(&i, &(lo, hi))| lo + (hi - lo) * i as f64 / (k - 1) as f64)
                    .collect(),
            );
            let mut axis = 0;
            while axis < n {
                idx[axis] += 1;
                if idx[axis] < k {
                    break;
                }
                idx[axis] = 0;
                axis += 1;
            }
            if axis == n {
                break;
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(VALIDATION_SEED);
        for _ in 0..VALIDATION_SAMPLES {
            out.push(
                self.domain
                    .iter()
                    .map(|&(lo, hi)| rng.gen_range(lo..=hi))
                    .collect(),
            );
        }
        out
    }

    /// Samples the domain and rejects the metric at the first witness of a
    /// non-positive `a` or `|β|_α ≥ 1`. Returns the largest norm seen.
    pub fn validate(&self) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for x in self.validation_points() {
            worst = worst.max(self.check_point(&x)?);
        }
        Ok(worst)
    }

    /// Uniform seeded points strictly inside the domain, shrunk towards the
    /// center by `margin` (a fraction of each half-width).
    pub fn interior_samples(&self, count: usize, seed: u64, margin: f64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count)
            .map(|_| {
                self.domain
                    .iter()
                    .map(|&(lo, hi)| {
                        let c = 0.5 * (lo + hi);
                        let r = 0.5 * (hi - lo) * (1.0 - margin);
                        rng.gen_range(c - r..=c + r)
                    })
                    .collect()
            })
            .collect()
    }
}

impl SmoothMap for MetricSpec {
    fn arity_in(&self) -> usize {
        self.n
    }

    /// `a` row-major followed by `b`.
    fn arity_out(&self) -> usize {
        self.n * self.n + self.n
    }

    fn eval<T: Scalar>(&self, x: &[T]) -> std::result::Result<Vec<T>, EvalError> {
        let (a, b) = self.components(x)?;
        Ok(a.into_iter().flatten().chain(b).collect())
    }
}

/// Reads and validates a metric document.
pub fn load_metric_spec(text: &str) -> Result<MetricSpec> {
    MetricSpec::from_json(text)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(a: &[(&str, &str)], b: &[&str], domain: &[[f64; 2]]) -> String {
        let d = MetricDocument {
            name: "t".into(),
            n: b.len(),
            a: a.iter()
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .collect(),
            b: b.iter().map(|s| s.to_string()).collect(),
            domain: domain.to_vec(),
        };
        serde_json::to_string(&d).unwrap()
    }

    #[test]
    fn euclidean_constant_beta_is_valid() {
        let text = doc(
            &[("11", "1"), ("22", "1"), ("33", "1")],
            &["0.5", "0", "0"],
            &[[-1.0, 1.0]; 3],
        );
        let spec = load_metric_spec(&text).unwrap();
        assert!((spec.validate().unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn norm_violation_is_witnessed() {
        let text = doc(&[("11", "1"), ("22", "1")], &["x1", "0"], &[[-2.0, 2.0]; 2]);
        match load_metric_spec(&text) {
            Err(Error::RandersNorm { point, norm }) => {
                assert!(point[0].abs() >= 1.0);
                assert!(norm >= 1.0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn indefinite_matrix_is_rejected() {
        let text = doc(
            &[("11", "1"), ("12", "2"), ("22", "1")],
            &["0", "0"],
            &[[0.0, 1.0]; 2],
        );
        match load_metric_spec(&text) {
            Err(Error::NotPositiveDefinite { eigenvalue, .. }) => {
                assert!((eigenvalue + 1.0).abs() < 1e-12)
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn parse_errors_name_the_component() {
        let text = doc(
            &[("11", "1"), ("22", "x1 + (x2")],
            &["0", "0"],
            &[[0.0, 1.0]; 2],
        );
        match load_metric_spec(&text) {
            Err(Error::Component { component, source }) => {
                assert_eq!(component, "a22");
                assert_eq!(source.offset(), 9);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_diagonal_and_lower_keys() {
        let text = doc(&[("11", "1")], &["0", "0"], &[[0.0, 1.0]; 2]);
        assert!(matches!(
            load_metric_spec(&text),
            Err(Error::InvalidSpec(_))
        ));
        let text = doc(
            &[("11", "1"), ("22", "1"), ("21", "0")],
            &["0", "0"],
            &[[0.0, 1.0]; 2],
        );
        assert!(matches!(
            load_metric_spec(&text),
            Err(Error::InvalidSpec(_))
        ));
    }

    #[test]
    fn document_round_trip() {
        let text = doc(
            &[("11", "1 + x2^2"), ("12", "0.1*x1"), ("22", "2")],
            &["0.2*sin(x1)", "0"],
            &[[-1.0, 1.0], [0.0, 0.5]],
        );
        let spec = load_metric_spec(&text).unwrap();
        let again = MetricSpec::from_document(&spec.to_document()).unwrap();
        assert_eq!(spec, again);
    }

    #[test]
    fn validation_is_deterministic() {
        let text = doc(&[("11", "1"), ("22", "1")], &["0", "0"], &[[0.0, 1.0]; 2]);
        let spec = load_metric_spec(&text).unwrap();
        let p = spec.validation_points();
        assert_eq!(p.len(), 25 + VALIDATION_SAMPLES);
        assert_eq!(p, spec.validation_points());
    }
}
