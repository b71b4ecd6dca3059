//! Builtin metrics: the Bao-Shen family on `S³` (as an exact frame and as a
//! coordinate chart), controls, and seeded random metrics.

mod builtins;
mod chart;
mod frame;
mod surd;

pub use builtins::{
    euclid_const_beta, euclid_rot_killing, euclidean, funk_ball, random_killing, random_metric,
    round_sphere, sphere_product,
};
pub use chart::{bao_shen_chart, validate_chart, CHART_POINTS, CHART_RADIUS, CHART_SEED};
pub use frame::{
    bao_shen_frame, frame_covariant_derivative, frame_covariant_differential, rational_parameter,
    FrameSpace, FrameTensor,
};
pub use surd::{Rational, Surd, SurdField};

use crate::diffcore::{linalg::Matrix, Backend};
use crate::error::{Error, Result};
use crate::metricdsl::{Expr, MetricDocument, MetricSpec};
use crate::riemann::{point_data, AlphaData, BetaData};

/// Where a metric lives: coordinate expressions or a constant frame.
#[derive(Debug, Clone, PartialEq)]
pub enum Geometry {
    Coordinate(MetricSpec),
    Frame(FrameSpace),
}

impl Geometry {
    pub fn n(&self) -> usize {
        match self {
            Geometry::Coordinate(s) => s.n,
            Geometry::Frame(f) => f.n,
        }
    }

    pub fn is_frame(&self) -> bool {
        matches!(self, Geometry::Frame(_))
    }

    /// `α`- and `β`-data at `x`. Frame data is the same everywhere.
    pub fn point_data(&self, x: &[f64], backend: Backend) -> Result<(AlphaData, BetaData)> {
        match self {
            Geometry::Coordinate(s) => point_data(s, x, backend),
            Geometry::Frame(f) => {
                if x.len() != f.n {
                    return Err(Error::ArityMismatch {
                        expected: f.n,
                        got: x.len(),
                    });
                }
                Ok((f.alpha_data(), f.beta_data()))
            }
        }
    }

    /// `count` seeded sample points. A frame space is homogeneous, so its
    /// points are labels only.
    pub fn sample_points(&self, count: usize, seed: u64) -> Vec<Vec<f64>> {
        match self {
            Geometry::Coordinate(s) => s.interior_samples(count, seed, 0.2),
            Geometry::Frame(f) => vec![vec![0.0; f.n]; count],
        }
    }
}

/// Right-invariant forms `η^a` of a chart and the weights `ω^a = w_a η^a`
/// of the orthonormal coframe.
#[derive(Debug, Clone, PartialEq)]
pub struct Coframe {
    pub eta: Vec<Vec<Expr>>,
    pub weights: Vec<f64>,
}

impl Coframe {
    /// `ω^a_j(x)`.
    pub fn matrix(&self, x: &[f64]) -> Result<Matrix<f64>> {
        self.eta
            .iter()
            .zip(&self.weights)
            .map(|(row, w)| row.iter().map(|e| Ok(w * e.eval(x)?)).collect())
            .collect()
    }

    /// Frame components `ω^a(y)` of a coordinate vector.
    pub fn to_frame(&self, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
        Ok(self
            .matrix(x)?
            .iter()
            .map(|row| row.iter().zip(y).map(|(a, b)| a * b).sum())
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CatalogEntry {
    pub name: String,
    pub geometry: Geometry,
    pub parameters: Vec<(String, f64)>,
    pub note: String,
    pub coframe: Option<Coframe>,
}

impl CatalogEntry {
    /// The metric document of a coordinate entry.
    pub fn to_document(&self) -> Result<MetricDocument> {
        match &self.geometry {
            Geometry::Coordinate(s) => Ok(s.to_document()),
            Geometry::Frame(_) => Err(Error::NotApplicable(format!(
                "{} is a frame entry and has no coordinate expressions",
                self.name
            ))),
        }
    }
}

/// Parameters accepted by [`build`]; unset values take each entry's default.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CatalogParams {
    pub k: Option<f64>,
    pub q: Option<f64>,
    pub sign: Option<i8>,
    pub n: Option<usize>,
    pub seed: Option<u64>,
    pub degree: Option<usize>,
    pub radius: Option<f64>,
}

pub struct CatalogInfo {
    pub name: &'static str,
    pub parameters: &'static str,
    pub summary: &'static str,
}

pub const ENTRIES: &[CatalogInfo] = &[
    CatalogInfo {
        name: "euclidean",
        parameters: "n=3",
        summary: "Euclidean metric, β = 0",
    },
    CatalogInfo {
        name: "euclid-const-beta",
        parameters: "n=3",
        summary: "Euclidean metric with a parallel 1-form",
    },
    CatalogInfo {
        name: "euclid-rot-killing",
        parameters: "q=0.3 radius=1.5",
        summary: "Euclidean ℝ³ with a rotational Killing form",
    },
    CatalogInfo {
        name: "funk-ball",
        parameters: "n=3",
        summary: "Funk metric of the unit ball",
    },
    CatalogInfo {
        name: "round-sphere",
        parameters: "n=3",
        summary: "unit sphere, stereographic chart, β = 0",
    },
    CatalogInfo {
        name: "sphere-product",
        parameters: "",
        summary: "S² × ℝ, β = 0",
    },
    CatalogInfo {
        name: "random",
        parameters: "seed=0 n=3 degree=2",
        summary: "seeded polynomial metric with a linear 1-form",
    },
    CatalogInfo {
        name: "random-killing",
        parameters: "seed=0 n=3",
        summary: "Euclidean metric with a seeded Killing form",
    },
    CatalogInfo {
        name: "bao-shen",
        parameters: "K=2 sign=+",
        summary: "Bao-Shen metric on S³ in a quaternion chart",
    },
    CatalogInfo {
        name: "bao-shen-frame",
        parameters: "K=2 sign=+",
        summary: "Bao-Shen metric on S³ in its exact orthonormal frame",
    },
];

pub fn build(name: &str, p: &CatalogParams) -> Result<CatalogEntry> {
    let n = p.n.unwrap_or(3);
    let seed = p.seed.unwrap_or(0);
    let k = p.k.unwrap_or(2.0);
    let sign = p.sign.unwrap_or(1);
    match name {
        "euclidean" => euclidean(n),
        "euclid-const-beta" => euclid_const_beta(n),
        "euclid-rot-killing" => euclid_rot_killing(p.q.unwrap_or(0.3), p.radius.unwrap_or(1.5)),
        "funk-ball" => funk_ball(n),
        "round-sphere" => round_sphere(n),
        "sphere-product" => sphere_product(),
        "random" => random_metric(seed, n, p.degree.unwrap_or(2)),
        "random-killing" => random_killing(seed, n),
        "bao-shen" => bao_shen_chart(k, sign),
        "bao-shen-frame" => {
            let space = bao_shen_frame(k, sign)?;
            Ok(CatalogEntry {
                name: "bao-shen-frame".into(),
                geometry: Geometry::Frame(space),
                parameters: vec![("K".into(), k), ("sign".into(), sign as f64)],
                note:
                    "Bao-Shen Randers metric of constant flag curvature K on S³, orthonormal frame"
                        .into(),
                coframe: None,
            })
        }
        other => Err(Error::InvalidParameter(format!(
            "unknown catalog entry `{other}` (known: {})",
            ENTRIES
                .iter()
                .map(|e| e.name)
                .collect::<Vec<_>>()
                .join(", ")
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_entry_builds_and_validates() {
        for info in ENTRIES {
            let e = build(info.name, &CatalogParams::default()).unwrap();
            match &e.geometry {
                Geometry::Coordinate(s) => {
                    s.validate().unwrap();
                    let doc = e.to_document().unwrap();
                    let back = MetricSpec::from_document(&doc).unwrap();
                    assert_eq!(&back, s, "{}", info.name);
                }
                Geometry::Frame(f) => {
                    f.validate().unwrap();
                    assert!(e.to_document().is_err());
                }
            }
        }
        assert!(build("nope", &CatalogParams::default()).is_err());
    }
}

#[cfg(test)]
mod realizations {
    use super::*;
    use crate::finsler::{deformation_jet, scalar_flag_variance, FinslerMetric};

    #[test]
    fn both_realizations_have_flag_curvature_k() {
        for k in [2.0, 4.0] {
            for sign in [1, -1] {
                let p = CatalogParams {
                    k: Some(k),
                    sign: Some(sign),
                    ..Default::default()
                };
                let chart = build("bao-shen", &p).unwrap();
                let Geometry::Coordinate(spec) = &chart.geometry else {
                    unreachable!()
                };
                let m = FinslerMetric::randers(spec.clone());
                let (x, y) = ([0.1, -0.2, 0.3], [0.4, 1.0, -0.7]);
                let st = scalar_flag_variance(&m, &x, &y, 10, 1, Backend::Dual).unwrap();
                assert!(
                    (st.mean - k).abs() < 1e-9 && st.variance < 1e-16,
                    "{k} {sign}: {st:?}"
                );
                let frame = build("bao-shen-frame", &p).unwrap();
                let (a, b) = frame.geometry.point_data(&[0.0; 3], Backend::Dual).unwrap();
                let yf = chart.coframe.as_ref().unwrap().to_frame(&x, &y).unwrap();
                let dj = deformation_jet(&a, &b, &yf, 1).unwrap();
                let fs = dj.scalar_flag_stats(10, 1).unwrap();
                assert!((fs.mean - k).abs() < 1e-12 && fs.variance < 1e-20, "{fs:?}");
                assert!((dj.f() - m.eval(&x, &y).unwrap()).abs() < 1e-13);
                let grad = dj.flag_gradient(&dj.sample_flags(5, 2)).unwrap();
                assert!(grad.iter().all(|v| v.abs() < 1e-12));
            }
        }
    }
}
