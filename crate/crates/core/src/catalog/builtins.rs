//! Coordinate entries: flat and round controls, the rotational Killing
//! form, the Funk metric and seeded random metrics.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{CatalogEntry, Geometry};
use crate::error::{Error, Result};
use crate::metricdsl::{parse_for, Expr, MetricSpec};

fn coordinate(
    name: &str,
    a: Vec<Vec<String>>,
    b: Vec<String>,
    domain: Vec<(f64, f64)>,
    parameters: Vec<(String, f64)>,
    note: &str,
) -> Result<CatalogEntry> {
    let n = b.len();
    let parse = |s: &String| parse_for(s, n).map_err(Error::from);
    let a = a
        .iter()
        .map(|row| row.iter().map(parse).collect::<Result<Vec<Expr>>>())
        .collect::<Result<Vec<_>>>()?;
    let b = b.iter().map(parse).collect::<Result<Vec<_>>>()?;
    let spec = MetricSpec::from_parts(name, a, b, domain)?;
    spec.validate()?;
    Ok(CatalogEntry {
        name: name.into(),
        geometry: Geometry::Coordinate(spec),
        parameters,
        note: note.into(),
        coframe: None,
    })
}

fn identity(n: usize) -> Vec<Vec<String>> {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { "1" } else { "0" }.to_string())
                .collect()
        })
        .collect()
}

fn check_dim(n: usize) -> Result<()> {
    if (2..=6).contains(&n) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "dimension must be between 2 and 6, got {n}"
        )))
    }
}

pub fn euclidean(n: usize) -> Result<CatalogEntry> {
    check_dim(n)?;
    coordinate(
        "euclidean",
        identity(n),
        vec!["0".into(); n],
        vec![(-2.0, 2.0); n],
        vec![("n".into(), n as f64)],
        "Euclidean metric, β = 0",
    )
}

/// Euclidean `α` with the parallel form `β = 0.3 dx¹ + 0.2 dx² + 0.1 dx³ …`.
pub fn euclid_const_beta(n: usize) -> Result<CatalogEntry> {
    check_dim(n)?;
    let b = (0..n)
        .map(|i| format!("{}", 0.3 / (i + 1) as f64))
        .collect();
    coordinate(
        "euclid-const-beta",
        identity(n),
        b,
        vec![(-1.0, 1.0); n],
        vec![("n".into(), n as f64)],
        "Euclidean metric with a parallel 1-form (locally Minkowskian)",
    )
}

/// `b = q(−x², x¹, 0)` on Euclidean `ℝ³` over the cube of half-width `radius`.
pub fn euclid_rot_killing(q: f64, radius: f64) -> Result<CatalogEntry> {
    if !(radius > 0.0) || !q.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "need radius > 0, got {radius}"
        )));
    }
    // The farthest point from the rotation axis is a vertical edge.
    let reach = q.abs() * radius * 2f64.sqrt();
    if reach >= 1.0 {
        return Err(Error::InvalidParameter(format!(
            "Randers condition fails on the box: |q|·√2·radius = {reach} ≥ 1"
        )));
    }
    coordinate(
        "euclid-rot-killing",
        identity(3),
        vec![format!("{}*x2", -q), format!("{q}*x1"), "0".into()],
        vec![(-radius, radius); 3],
        vec![("q".into(), q), ("radius".into(), radius)],
        "Euclidean ℝ³ with the rotational Killing form q(x¹dx² − x²dx¹)",
    )
}

/// `F = (√((1−|x|²)|y|² + ⟨x,y⟩²) + ⟨x,y⟩)/(1−|x|²)` on a cube inside the
/// unit ball.
pub fn funk_ball(n: usize) -> Result<CatalogEntry> {
    check_dim(n)?;
    let d = format!(
        "(1 - {})",
        (1..=n)
            .map(|i| format!("x{i}^2"))
            .collect::<Vec<_>>()
            .join(" - ")
    );
    let a = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let diag = if i == j {
                        format!("1/{d} + ")
                    } else {
                        String::new()
                    };
                    format!("{diag}x{}*x{}/{d}^2", i.min(j) + 1, i.max(j) + 1)
                })
                .collect()
        })
        .collect();
    let b = (1..=n).map(|i| format!("x{i}/{d}")).collect();
    let r = 0.9 / (n as f64).sqrt();
    coordinate(
        "funk-ball",
        a,
        b,
        vec![(-r, r); n],
        vec![("n".into(), n as f64)],
        "Funk metric of the unit ball (projectively flat, K = −1/4, not Killing)",
    )
}

/// Unit sphere in stereographic coordinates, `β = 0`.
pub fn round_sphere(n: usize) -> Result<CatalogEntry> {
    check_dim(n)?;
    let r2 = (1..=n)
        .map(|i| format!("x{i}^2"))
        .collect::<Vec<_>>()
        .join(" + ");
    let a = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        format!("4/(1 + {r2})^2")
                    } else {
                        "0".into()
                    }
                })
                .collect()
        })
        .collect();
    coordinate(
        "round-sphere",
        a,
        vec!["0".into(); n],
        vec![(-1.0, 1.0); n],
        vec![("n".into(), n as f64)],
        "unit round sphere in stereographic coordinates, β = 0",
    )
}

/// `S² × ℝ` with the unit round factor; not Einstein.
pub fn sphere_product() -> Result<CatalogEntry> {
    let s = "4/(1 + x1^2 + x2^2)^2".to_string();
    let a = vec![
        vec![s.clone(), "0".into(), "0".into()],
        vec!["0".into(), s, "0".into()],
        vec!["0".into(), "0".into(), "1".into()],
    ];
    coordinate(
        "sphere-product",
        a,
        vec!["0".into(); 3],
        vec![(-1.0, 1.0); 3],
        vec![],
        "product S² × ℝ, β = 0",
    )
}

fn coefficient(rng: &mut ChaCha8Rng, scale: f64) -> f64 {
    // Rounded so that the printed expression is exact.
    (rng.gen_range(-scale..scale) * 1e4).round() / 1e4
}

fn term(c: f64, monomial: &str) -> String {
    if monomial.is_empty() {
        format!("{c}")
    } else {
        format!("{c}*{monomial}")
    }
}

/// Monomials of degree `1..=degree` in `n` variables.
fn monomials(n: usize, degree: usize) -> Vec<String> {
    let mut out: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
    if degree >= 2 {
        for i in 1..=n {
            for j in i..=n {
                out.push(format!("x{i}*x{j}"));
            }
        }
    }
    out
}

fn join_terms(terms: Vec<String>) -> String {
    let s = terms.join(" + ");
    s.replace("+ -", "- ")
}

/// `a_ij = δ_ij + p_ij(x)` and `b_i = c_i + d_ij x^j` with seeded coefficients
/// on `[−1, 1]ⁿ`; `p_ij` are polynomials of degree `degree` without constant
/// term.
pub fn random_metric(seed: u64, n: usize, degree: usize) -> Result<CatalogEntry> {
    check_dim(n)?;
    if !(1..=2).contains(&degree) {
        return Err(Error::InvalidParameter(format!(
            "degree must be 1 or 2, got {degree}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mons = monomials(n, degree);
    let scale = 0.25 / mons.len() as f64;
    let mut a = identity(n);
    for i in 0..n {
        for j in i..n {
            let mut terms = vec![if i == j {
                "1".to_string()
            } else {
                "0".to_string()
            }];
            terms.extend(mons.iter().map(|m| term(coefficient(&mut rng, scale), m)));
            a[i][j] = join_terms(terms);
            a[j][i] = a[i][j].clone();
        }
    }
    let lin = monomials(n, 1);
    let b = (0..n)
        .map(|_| {
            let mut terms = vec![term(coefficient(&mut rng, 0.3 / (n as f64).sqrt()), "")];
            terms.extend(
                lin.iter()
                    .map(|m| term(coefficient(&mut rng, 0.3 / n as f64), m)),
            );
            join_terms(terms)
        })
        .collect();
    let entry = coordinate(
        "random",
        a,
        b,
        vec![(-1.0, 1.0); n],
        vec![
            ("seed".into(), seed as f64),
            ("n".into(), n as f64),
            ("degree".into(), degree as f64),
        ],
        "seeded polynomial perturbation of the Euclidean metric with a linear 1-form",
    )?;
    let Geometry::Coordinate(spec) = &entry.geometry else {
        unreachable!()
    };
    let norm = spec.validate()?;
    if norm >= 0.8 {
        return Err(Error::InvalidParameter(format!(
            "seed {seed}: |β| reaches {norm} ≥ 0.8 on the box"
        )));
    }
    Ok(entry)
}

/// Euclidean `α` with the Killing form `b = c + A x`, `A` antisymmetric.
pub fn random_killing(seed: u64, n: usize) -> Result<CatalogEntry> {
    check_dim(n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            m[i][j] = coefficient(&mut rng, 0.3 / n as f64);
            m[j][i] = -m[i][j];
        }
    }
    let b = (0..n)
        .map(|i| {
            let mut terms = vec![term(coefficient(&mut rng, 0.3 / (n as f64).sqrt()), "")];
            terms.extend(
                (0..n)
                    .filter(|&j| j != i)
                    .map(|j| term(m[i][j], &format!("x{}", j + 1))),
            );
            join_terms(terms)
        })
        .collect();
    coordinate(
        "random-killing",
        identity(n),
        b,
        vec![(-1.0, 1.0); n],
        vec![("seed".into(), seed as f64), ("n".into(), n as f64)],
        "Euclidean metric with a seeded Killing form (translation plus rotation)",
    )
}
