//! A coordinate chart of `S³` carrying the right-invariant coframe.
//!
//! The chart is the upper hemisphere of the unit quaternions,
//! `q(x) = (w, x₁, x₂, x₃)` with `w = √(1 − |x|²)`. Writing
//! `dq q̄ = η¹ i + η² j + η³ k` gives right-invariant forms with
//! `d(dq q̄) = (dq q̄) ∧ (dq q̄)`, i.e. `dη¹ = 2η² ∧ η³` and cyclic. In
//! components `η^a_j = x_a x_j / w + w δ_aj − ε_ajc x_c`.

use super::{CatalogEntry, Coframe, Geometry};
use crate::diffcore::Dual;
use crate::error::{Error, Result};
use crate::metricdsl::{parse_for, Expr, MetricSpec};

pub const CHART_SEED: u64 = 0xC4A2_7003;
pub const CHART_POINTS: usize = 20;
/// Half-width of the coordinate box; keeps `w ≥ 1/2`.
pub const CHART_RADIUS: f64 = 0.5;

fn levi_civita(a: usize, b: usize, c: usize) -> i32 {
    match (a, b, c) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1,
        _ => 0,
    }
}

const W: &str = "sqrt(1 - x1^2 - x2^2 - x3^2)";

/// `η^a_j` as text.
fn eta_text(a: usize, j: usize) -> String {
    let mut s = format!("x{}*x{}/{W}", a + 1, j + 1);
    if a == j {
        s.push_str(&format!(" + {W}"));
    }
    for c in 0..3 {
        match levi_civita(a, j, c) {
            1 => s.push_str(&format!(" - x{}", c + 1)),
            -1 => s.push_str(&format!(" + x{}", c + 1)),
            _ => {}
        }
    }
    s
}

fn number(v: f64) -> String {
    if v < 0.0 {
        format!("({v})")
    } else {
        format!("{v}")
    }
}

/// The Bao-Shen metric `α² = K(η¹)² + (η²)² + (η³)²`,
/// `β = δ η¹` in the hemisphere chart.
pub fn bao_shen_chart(k: f64, delta_sign: i8) -> Result<CatalogEntry> {
    // Checks K and the sign.
    super::frame::bao_shen_frame(k, delta_sign)?;
    let eps = k.sqrt();
    let delta = delta_sign as f64 * (k - 1.0).sqrt();
    let eta: Vec<Vec<String>> = (0..3)
        .map(|a| (0..3).map(|j| eta_text(a, j)).collect())
        .collect();
    let parse = |s: &str| parse_for(s, 3).map_err(Error::from);
    let mut a = vec![vec![Expr::Const(0.0); 3]; 3];
    for i in 0..3 {
        for j in i..3 {
            let term = |c: usize| format!("({})*({})", eta[c][i], eta[c][j]);
            let text = format!("{}*{} + {} + {}", number(k), term(0), term(1), term(2));
            a[i][j] = parse(&text)?;
            a[j][i] = a[i][j].clone();
        }
    }
    let b = (0..3)
        .map(|i| parse(&format!("{}*({})", number(delta), eta[0][i])))
        .collect::<Result<Vec<_>>>()?;
    let spec = MetricSpec::from_parts("bao-shen", a, b, vec![(-CHART_RADIUS, CHART_RADIUS); 3])?;
    let eta = eta
        .iter()
        .map(|row| row.iter().map(|s| parse(s)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    Ok(CatalogEntry {
        name: "bao-shen".into(),
        geometry: Geometry::Coordinate(spec),
        parameters: vec![("K".into(), k), ("sign".into(), delta_sign as f64)],
        note: "Bao-Shen Randers metric of constant flag curvature K on S³, hemisphere chart of the unit quaternions".into(),
        coframe: Some(Coframe {
            eta,
            weights: vec![eps, 1.0, 1.0],
        }),
    })
}

/// Largest entry of `dη^a − 2η^b ∧ η^c` (cyclic `a, b, c`) over
/// `CHART_POINTS` seeded points of the chart box.
pub fn validate_chart(entry: &CatalogEntry) -> Result<f64> {
    let (Geometry::Coordinate(spec), Some(frame)) = (&entry.geometry, &entry.coframe) else {
        return Err(Error::NotApplicable(format!(
            "{} has no coordinate coframe",
            entry.name
        )));
    };
    let n = spec.n;
    if n != 3 || frame.eta.len() != 3 {
        return Err(Error::NotApplicable(
            "structure equations are those of S³".into(),
        ));
    }
    let mut worst: f64 = 0.0;
    for x in spec.interior_samples(CHART_POINTS, CHART_SEED, 0.0) {
        // d[a][k][j] = ∂_j η^a_k
        let mut value = vec![vec![0.0; n]; 3];
        let mut d = vec![vec![vec![0.0; n]; n]; 3];
        for j in 0..n {
            let xs: Vec<Dual<f64>> = (0..n)
                .map(|i| Dual::new(x[i], (i == j) as u8 as f64))
                .collect();
            for a in 0..3 {
                for k in 0..n {
                    let v = frame.eta[a][k].eval(&xs)?;
                    value[a][k] = v.re;
                    d[a][k][j] = v.eps;
                }
            }
        }
        for a in 0..3 {
            let (b, c) = ((a + 1) % 3, (a + 2) % 3);
            for j in 0..n {
                for k in 0..n {
                    let d_eta = d[a][k][j] - d[a][j][k];
                    let wedge = 2.0 * (value[b][j] * value[c][k] - value[b][k] * value[c][j]);
                    worst = worst.max((d_eta - wedge).abs());
                }
            }
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chart_satisfies_structure_equations() {
        let e = bao_shen_chart(4.0, 1).unwrap();
        assert!(validate_chart(&e).unwrap() < 1e-12);
    }

    #[test]
    fn broken_coframes_are_detected() {
        let base = bao_shen_chart(2.0, 1).unwrap();
        let mut scaled = base.clone();
        let cf = scaled.coframe.as_mut().unwrap();
        cf.eta[0] = cf.eta[0]
            .iter()
            .map(|e| Expr::binary(crate::metricdsl::BinOp::Mul, Expr::Const(1.1), e.clone()))
            .collect();
        let r = validate_chart(&scaled).unwrap();
        assert!(r > 0.15 && r < 0.5, "{r}");
        let mut swapped = base;
        swapped.coframe.as_mut().unwrap().eta.swap(1, 2);
        let r = validate_chart(&swapped).unwrap();
        assert!(r > 3.0 && r < 8.0, "{r}");
    }

    #[test]
    fn coframe_pulls_chart_metric_back_to_identity() {
        let e = bao_shen_chart(2.0, -1).unwrap();
        let Geometry::Coordinate(spec) = &e.geometry else {
            unreachable!()
        };
        let x = [0.2, -0.1, 0.3];
        let (a, b) = spec.components::<f64>(&x).unwrap();
        let w = e.coframe.as_ref().unwrap().matrix(&x).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let aw: f64 = (0..3).map(|m| w[m][i] * w[m][j]).sum();
                assert!((aw - a[i][j]).abs() < 1e-14);
            }
            assert!((b[i] + 0.5f64.sqrt() * w[0][i]).abs() < 1e-14);
        }
    }
}
