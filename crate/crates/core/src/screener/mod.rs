//! Necessary conditions for a Randers metric with Killing `β` to be of
//! scalar flag curvature.
//!
//! At each sample point the screener fits `c` from
//! `t_00 + s_{0;0} = c(α² − b⁻²β²)`, checks `s^m_{0;m} = −(n−1)b⁻²cβ`,
//! fits `λ` from `t_0 = −(n−1)/(n+1)(λ + cb⁻²)β`, decomposes
//! `Ric_α = (n−1)λα² + (n+1)t_00` and compares the two `λ`. Any clear
//! violation proves that the metric is not of scalar flag curvature; passing
//! proves nothing. `κ`, the `Ξ` system and the direct flag variance are
//! reported alongside as corroboration.
//!
//! Equation ids in reports:
//!
//! | id | identity |
//! |---|---|
//! | `eq_1_3` | `t_00 + s_{0;0} = c(α² − b⁻²β²)` |
//! | `eq_1_2` | `s^m_{0;m} = −(n−1)b⁻²cβ` |
//! | `eq_1_5` | `t_0 = −(n−1)/(n+1)(λ + cb⁻²)β` |
//! | `eq_4_14` | `Ric_α = (n−1)λα² + (n+1)t_00` |
//! | `eq_4_15` | the two `λ` agree |
//! | `eq_3_3` | `Ric = 2αs^m_{0;m} + (n−1)(κα² + t_00 + Ξ)` |
//! | `eq_4_9`, `eq_4_10` | `Ξ₂α² + Ξ₀ = 0`, `Ξ₃α² + Ξ₁ = 0` |

mod fits;
mod lemmas;
mod subject;
mod xi;

pub use fits::{
    alpha_ricci_fit, check_divergence, check_killing, check_preconditions, fit_c, fit_lambda,
    kappa_target, ricci_33_fit, t_matrix, ConditionFit, B2_THRESHOLD, KILLING_THRESHOLD,
};
pub use lemmas::{lemma_residuals, LemmaResiduals, Sides, SCALAR_FLAG_THRESHOLD};
pub use subject::Subject;
pub use xi::{xi_decomposition, XiCoefficients};

use serde::Serialize;

use crate::catalog::Geometry;
use crate::diffcore::Backend;
use crate::error::{Error, Result};
use crate::par::Execution;

/// Residuals above this are violations regardless of `tol`.
pub const FAIL_THRESHOLD: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplePlan {
    pub points: usize,
    pub directions: usize,
    pub flags: usize,
    pub seed: u64,
    pub backend: Backend,
    pub exec: Execution,
    /// Pass threshold.
    pub tol: f64,
}

impl Default for SamplePlan {
    fn default() -> Self {
        SamplePlan {
            points: 5,
            directions: 6,
            flags: 8,
            seed: 0,
            backend: Backend::Dual,
            exec: Execution::Parallel,
            tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointReport {
    pub x: Vec<f64>,
    pub b2: f64,
    pub killing_residual: f64,
    pub c: Option<ConditionFit>,
    pub divergence: Option<f64>,
    pub lambda: Option<ConditionFit>,
    pub lambda_ricci: Option<ConditionFit>,
    /// `|λ − λ_Ric| / (1 + |λ|)`
    pub lambda_gap: Option<f64>,
    pub kappa: Option<ConditionFit>,
    pub xi: Option<XiCoefficients>,
    /// Largest sample variance of `K` over the directions.
    pub flag_variance: f64,
    pub flag_curvature_mean: f64,
}

/// Largest residual of each identity over the sample points.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Residuals {
    pub eq_1_3: Option<f64>,
    pub eq_1_2: Option<f64>,
    pub eq_1_5: Option<f64>,
    pub eq_4_14: Option<f64>,
    pub eq_4_15: Option<f64>,
    pub eq_3_3: Option<f64>,
    pub eq_4_9: Option<f64>,
    pub eq_4_10: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    NecessaryPass,
    Fail {
        failed: String,
        witness: Vec<f64>,
        residual: f64,
    },
    NotApplicable {
        reason: String,
        witness: Option<Vec<f64>>,
    },
    Inconclusive {
        equation: String,
        witness: Vec<f64>,
        residual: f64,
    },
}

impl Verdict {
    pub fn exit_code(&self) -> i32 {
        match self {
            Verdict::NecessaryPass => 0,
            Verdict::Fail { .. } => 1,
            Verdict::NotApplicable { .. } => 3,
            Verdict::Inconclusive { .. } => 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScreenerReport {
    pub metric: String,
    pub backend: &'static str,
    pub seed: u64,
    pub killing_residual: f64,
    #[serde(flatten)]
    pub verdict: Verdict,
    /// Means over the points where each fit exists.
    pub c: Option<f64>,
    pub lambda: Option<f64>,
    pub lambda_ricci: Option<f64>,
    pub kappa: Option<f64>,
    /// Largest minus smallest `c` and `λ` over the points; the identities
    /// allow both to depend on `x`.
    pub c_spread: Option<f64>,
    pub lambda_spread: Option<f64>,
    pub residuals: Residuals,
    pub flag_variance: f64,
    pub retried_with_fd: bool,
    pub points: Vec<PointReport>,
}

pub fn backend_name(b: Backend) -> &'static str {
    match b {
        Backend::Dual => "dual",
        Backend::FiniteDifference => "fd",
    }
}

fn screen_point(
    subject: &Subject,
    x: &[f64],
    index: usize,
    plan: &SamplePlan,
) -> Result<PointReport> {
    let (alpha, beta) = subject.point_data(x)?;
    let ys = Subject::directions(&alpha, plan.directions, plan.seed, index as u64);
    let mut ricci = Vec::with_capacity(ys.len());
    let mut flag_variance: f64 = 0.0;
    let mut flag_sum = 0.0;
    for (d, y) in ys.iter().enumerate() {
        let jet = subject.direction_jet(x, &alpha, &beta, y, 0)?;
        let stats = jet.scalar_flag_stats(plan.flags, plan.seed.wrapping_add(d as u64))?;
        flag_variance = flag_variance.max(stats.variance);
        flag_sum += stats.mean;
        ricci.push(jet.ricci());
    }
    let mut report = PointReport {
        x: x.to_vec(),
        b2: beta.b2,
        killing_residual: beta.killing_defect(),
        c: None,
        divergence: None,
        lambda: None,
        lambda_ricci: None,
        lambda_gap: None,
        kappa: None,
        xi: None,
        flag_variance,
        flag_curvature_mean: flag_sum / ys.len() as f64,
    };
    if check_killing(&beta).is_err() {
        return Ok(report);
    }
    let kappa = ricci_33_fit(&alpha, &beta, &ys, &ricci)?;
    report.xi = Some(xi_decomposition(&alpha, &beta, kappa.value)?);
    report.kappa = Some(kappa);
    let ric = alpha_ricci_fit(&alpha, &beta);
    if check_preconditions(&beta).is_ok() {
        let c = fit_c(&alpha, &beta)?;
        report.divergence = Some(check_divergence(&alpha, &beta, c.value)?);
        let lambda = fit_lambda(&alpha, &beta, c.value)?;
        report.lambda_gap = Some((lambda.value - ric.value).abs() / (1.0 + lambda.value.abs()));
        report.lambda = Some(lambda);
        report.c = Some(c);
    }
    report.lambda_ricci = Some(ric);
    Ok(report)
}

fn mean_and_spread(values: impl Iterator<Item = f64>) -> (Option<f64>, Option<f64>) {
    let v: Vec<f64> = values.collect();
    if v.is_empty() {
        return (None, None);
    }
    let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (Some(v.iter().sum::<f64>() / v.len() as f64), Some(hi - lo))
}

/// Per-point residuals of the verdict identities, in checking order.
fn verdict_residuals(p: &PointReport) -> [(&'static str, Option<f64>); 5] {
    [
        ("eq_1_3", p.c.as_ref().map(|f| f.residual)),
        ("eq_1_2", p.divergence),
        ("eq_1_5", p.lambda.as_ref().map(|f| f.residual)),
        ("eq_4_14", p.lambda_ricci.as_ref().map(|f| f.residual)),
        ("eq_4_15", p.lambda_gap),
    ]
}

fn decide(points: &[PointReport], tol: f64) -> Verdict {
    if points.iter().all(|p| !(p.b2 > B2_THRESHOLD)) {
        return Verdict::NotApplicable {
            reason: "beta_zero".into(),
            witness: None,
        };
    }
    if let Some(p) = points
        .iter()
        .find(|p| !(p.killing_residual < KILLING_THRESHOLD))
    {
        return Verdict::NotApplicable {
            reason: "beta_not_killing".into(),
            witness: Some(p.x.clone()),
        };
    }
    if let Some(p) = points.iter().find(|p| !(p.b2 > B2_THRESHOLD)) {
        return Verdict::NotApplicable {
            reason: "b_zero".into(),
            witness: Some(p.x.clone()),
        };
    }
    let fail = FAIL_THRESHOLD.max(tol);
    for k in 0..5 {
        for p in points {
            let (name, r) = verdict_residuals(p)[k];
            let r = r.unwrap_or(f64::NAN);
            if !(r <= fail) {
                return Verdict::Fail {
                    failed: name.into(),
                    witness: p.x.clone(),
                    residual: r,
                };
            }
        }
    }
    for k in 0..5 {
        for p in points {
            let (name, r) = verdict_residuals(p)[k];
            let r = r.unwrap_or(0.0);
            if r >= tol {
                return Verdict::Inconclusive {
                    equation: name.into(),
                    witness: p.x.clone(),
                    residual: r,
                };
            }
        }
    }
    Verdict::NecessaryPass
}

fn max_of(points: &[PointReport], f: impl Fn(&PointReport) -> Option<f64>) -> Option<f64> {
    points.iter().filter_map(f).reduce(f64::max)
}

fn screen_once(name: &str, geometry: &Geometry, plan: &SamplePlan) -> Result<ScreenerReport> {
    let subject = Subject::new(geometry, plan.backend);
    let xs = geometry.sample_points(plan.points, plan.seed);
    let indexed: Vec<(usize, Vec<f64>)> = xs.into_iter().enumerate().collect();
    let points = plan
        .exec
        .map(&indexed, |(i, x)| screen_point(&subject, x, *i, plan))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let verdict = decide(&points, plan.tol);
    let (c, c_spread) =
        mean_and_spread(points.iter().filter_map(|p| p.c.as_ref().map(|f| f.value)));
    let (lambda, lambda_spread) = mean_and_spread(
        points
            .iter()
            .filter_map(|p| p.lambda.as_ref().map(|f| f.value)),
    );
    let (lambda_ricci, _) = mean_and_spread(
        points
            .iter()
            .filter_map(|p| p.lambda_ricci.as_ref().map(|f| f.value)),
    );
    let (kappa, _) = mean_and_spread(
        points
            .iter()
            .filter_map(|p| p.kappa.as_ref().map(|f| f.value)),
    );
    let residuals = Residuals {
        eq_1_3: max_of(&points, |p| p.c.as_ref().map(|f| f.residual)),
        eq_1_2: max_of(&points, |p| p.divergence),
        eq_1_5: max_of(&points, |p| p.lambda.as_ref().map(|f| f.residual)),
        eq_4_14: max_of(&points, |p| p.lambda_ricci.as_ref().map(|f| f.residual)),
        eq_4_15: max_of(&points, |p| p.lambda_gap),
        eq_3_3: max_of(&points, |p| p.kappa.as_ref().map(|f| f.residual)),
        eq_4_9: max_of(&points, |p| p.xi.as_ref().map(|x| x.residual_cubic)),
        eq_4_10: max_of(&points, |p| p.xi.as_ref().map(|x| x.residual_quadratic)),
    };
    Ok(ScreenerReport {
        metric: name.to_string(),
        backend: backend_name(plan.backend),
        seed: plan.seed,
        killing_residual: points
            .iter()
            .map(|p| p.killing_residual)
            .fold(0.0, f64::max),
        verdict,
        c,
        lambda,
        lambda_ricci,
        kappa,
        c_spread,
        lambda_spread,
        residuals,
        flag_variance: points.iter().map(|p| p.flag_variance).fold(0.0, f64::max),
        retried_with_fd: false,
        points,
    })
}

/// Runs the screener over `plan.points` seeded points. An inconclusive
/// coordinate run on the dual backend is repeated with finite differences.
pub fn screen(name: &str, geometry: &Geometry, plan: &SamplePlan) -> Result<ScreenerReport> {
    if plan.points == 0 || plan.directions == 0 {
        return Err(Error::InvalidParameter(
            "sample plan needs at least one point and one direction".into(),
        ));
    }
    if plan.flags < 3 {
        return Err(Error::InvalidParameter(format!(
            "flag count must be at least 3, got {}",
            plan.flags
        )));
    }
    if !(plan.tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "tolerance must be positive, got {}",
            plan.tol
        )));
    }
    let report = screen_once(name, geometry, plan)?;
    if matches!(report.verdict, Verdict::Inconclusive { .. })
        && !geometry.is_frame()
        && plan.backend == Backend::Dual
    {
        let fd = SamplePlan {
            backend: Backend::FiniteDifference,
            ..*plan
        };
        let mut retry = screen_once(name, geometry, &fd)?;
        retry.retried_with_fd = true;
        return Ok(retry);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{build, CatalogParams};

    fn entry(name: &str, p: CatalogParams) -> crate::catalog::CatalogEntry {
        build(name, &p).unwrap()
    }

    fn at(
        name: &str,
        p: CatalogParams,
        x: &[f64],
    ) -> (crate::riemann::AlphaData, crate::riemann::BetaData) {
        entry(name, p)
            .geometry
            .point_data(x, Backend::Dual)
            .unwrap()
    }

    fn k(v: f64) -> CatalogParams {
        CatalogParams {
            k: Some(v),
            ..Default::default()
        }
    }

    #[test]
    fn bao_shen_frame_fits_c_and_lambda() {
        let (a, b) = at("bao-shen-frame", k(4.0), &[0.0; 3]);
        let c = fit_c(&a, &b).unwrap();
        assert!((c.value + 3.0).abs() < 1e-12 && c.residual < 1e-12, "{c:?}");
        assert!(check_divergence(&a, &b, c.value).unwrap() < 1e-12);
        let l = fit_lambda(&a, &b, c.value).unwrap();
        assert!((l.value - 4.0).abs() < 1e-12 && l.residual < 1e-12);
        let r = alpha_ricci_fit(&a, &b);
        assert!((r.value - 4.0).abs() < 1e-12 && r.residual < 1e-12, "{r:?}");
    }

    #[test]
    fn parallel_form_gives_zero_c() {
        let (a, b) = at(
            "euclid-const-beta",
            CatalogParams::default(),
            &[0.1, 0.2, 0.3],
        );
        let c = fit_c(&a, &b).unwrap();
        assert_eq!((c.value, c.residual), (0.0, 0.0));
        assert_eq!(check_divergence(&a, &b, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn round_sphere_is_einstein_with_unit_constant() {
        let (a, b) = at("round-sphere", CatalogParams::default(), &[0.3, -0.2, 0.1]);
        let r = alpha_ricci_fit(&a, &b);
        assert!((r.value - 1.0).abs() < 1e-12 && r.residual < 1e-12, "{r:?}");
        assert!(fit_c(&a, &b).is_err());
        let xi = xi_decomposition(&a, &b, 1.0).unwrap();
        assert!(xi.xi0.iter().all(|v| *v == 0.0) && xi.xi2.iter().all(|v| *v == 0.0));
        assert_eq!(xi.xi3, 0.0);
    }

    #[test]
    fn skew_killing_form_violates_lambda_condition() {
        let mut worst: f64 = 0.0;
        for seed in 0..4 {
            let p = CatalogParams {
                seed: Some(seed),
                ..Default::default()
            };
            let (a, b) = at("random-killing", p, &[0.2, -0.4, 0.3]);
            let c = fit_c(&a, &b).unwrap();
            worst = worst.max(fit_lambda(&a, &b, c.value).unwrap().residual);
        }
        assert!(worst > 1e-3, "{worst}");
    }

    #[test]
    fn bao_shen_kappa_and_xi_system() {
        let e = entry("bao-shen-frame", k(2.0));
        let subject = Subject::new(&e.geometry, Backend::Dual);
        let (a, b) = subject.point_data(&[0.0; 3]).unwrap();
        let ys = Subject::directions(&a, 6, 3, 0);
        let ric: Vec<f64> = ys
            .iter()
            .map(|y| {
                subject
                    .direction_jet(&[0.0; 3], &a, &b, y, 0)
                    .unwrap()
                    .ricci()
            })
            .collect();
        let kappa = ricci_33_fit(&a, &b, &ys, &ric).unwrap();
        assert!(
            (kappa.value - 3.0).abs() < 1e-10 && kappa.residual < 1e-10,
            "{kappa:?}"
        );
        let xi = xi_decomposition(&a, &b, kappa.value).unwrap();
        assert!(
            xi.residual_cubic < 1e-10 && xi.residual_quadratic < 1e-10,
            "{xi:?}"
        );
        let jet = subject.direction_jet(&[0.0; 3], &a, &b, &ys[0], 1).unwrap();
        let lem = lemma_residuals(&a, &b, kappa.value, &jet, 8, 1).unwrap();
        assert!(
            lem.max_residual() < 1e-10 && lem.k_dot_b.abs() < 1e-10,
            "{lem:?}"
        );
    }

    #[test]
    fn lemmas_refuse_non_scalar_flag_metrics() {
        let e = entry("euclid-rot-killing", CatalogParams::default());
        let subject = Subject::new(&e.geometry, Backend::Dual);
        let x = [0.4, 0.7, -0.2];
        let (a, b) = subject.point_data(&x).unwrap();
        let jet = subject
            .direction_jet(&x, &a, &b, &[0.3, -0.5, 0.8], 1)
            .unwrap();
        assert!(matches!(
            lemma_residuals(&a, &b, 0.0, &jet, 8, 1),
            Err(Error::NotApplicable(_))
        ));
    }

    fn plan() -> SamplePlan {
        SamplePlan {
            points: 3,
            directions: 4,
            flags: 6,
            ..Default::default()
        }
    }

    #[test]
    fn verdicts_of_the_controls() {
        for name in ["bao-shen-frame", "bao-shen"] {
            let e = entry(name, k(2.0));
            let r = screen(name, &e.geometry, &plan()).unwrap();
            assert_eq!(
                r.verdict,
                Verdict::NecessaryPass,
                "{name}: {:?}",
                r.residuals
            );
            assert!((r.c.unwrap() + 1.0).abs() < 1e-8 && (r.lambda.unwrap() - 2.0).abs() < 1e-8);
        }
        let e = entry("funk-ball", CatalogParams::default());
        let r = screen("funk-ball", &e.geometry, &plan()).unwrap();
        assert!(
            matches!(&r.verdict, Verdict::NotApplicable { reason, .. } if reason == "beta_not_killing")
        );
        assert_eq!(r.verdict.exit_code(), 3);
        let e = entry("euclidean", CatalogParams::default());
        let r = screen("euclidean", &e.geometry, &plan()).unwrap();
        assert!(
            matches!(&r.verdict, Verdict::NotApplicable { reason, .. } if reason == "beta_zero")
        );
        let e = entry("euclid-rot-killing", CatalogParams::default());
        let r = screen("euclid-rot-killing", &e.geometry, &plan()).unwrap();
        assert_eq!(r.verdict.exit_code(), 1, "{:?}", r.verdict);
        assert!(r.flag_variance > 1e-3);
    }

    #[test]
    fn screening_is_deterministic_across_execution_modes() {
        let e = entry("random-killing", CatalogParams::default());
        let par = screen("r", &e.geometry, &plan()).unwrap();
        let seq = screen(
            "r",
            &e.geometry,
            &SamplePlan {
                exec: Execution::Sequential,
                ..plan()
            },
        )
        .unwrap();
        assert_eq!(par, seq);
        assert!(screen(
            "r",
            &e.geometry,
            &SamplePlan {
                points: 0,
                ..plan()
            }
        )
        .is_err());
    }
}
