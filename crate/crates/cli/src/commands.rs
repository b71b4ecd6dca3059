//! Document builders of the `report`, `screen`, `verify` and `geodesic`
//! commands.

use std::collections::BTreeMap;

use randers_core::catalog::{CatalogEntry, Geometry};
use randers_core::diffcore::linalg;
use randers_core::diffcore::Backend;
use randers_core::finsler::closed::{
    j_bar_closed, mean_landsberg_closed, randers_fundamental_tensor, randers_mean_cartan,
    randers_s_curvature, randers_sigma_bh, rho_covector,
};
use randers_core::finsler::{
    geodesic_trace, non_riemannian, scalar_flag_identities, structure_defects, FinslerMetric,
    PhiFunction,
};
use randers_core::par::Execution;
use randers_core::riemann::{contract_with_y, divergence_sides, AlphaData, BetaData};
use randers_core::screener::{
    lemma_residuals, ricci_33_fit, screen as run_screen, LemmaResiduals, SamplePlan,
    ScreenerReport, Subject, SCALAR_FLAG_THRESHOLD,
};
use randers_core::{Error, Result};
use serde::Serialize;

use crate::output::SCHEMA;

pub struct Settings {
    pub points: usize,
    pub directions: usize,
    pub flags: usize,
    pub seed: u64,
    pub backend: Backend,
    pub exec: Execution,
    pub tol: f64,
}

impl Settings {
    fn check(&self) -> Result<()> {
        if self.points == 0 || self.directions == 0 {
            return Err(Error::InvalidParameter(
                "--points and --directions must be positive".into(),
            ));
        }
        if self.flags < 3 {
            return Err(Error::InvalidParameter(format!(
                "--flags must be at least 3, got {}",
                self.flags
            )));
        }
        Ok(())
    }
}

#[derive(Serialize)]
struct Header<'a> {
    schema: &'static str,
    command: &'static str,
    metric: &'a str,
    parameters: BTreeMap<String, f64>,
    backend: String,
    seed: u64,
}

fn header<'a>(command: &'static str, entry: &'a CatalogEntry, s: &Settings) -> Header<'a> {
    Header {
        schema: SCHEMA,
        command,
        metric: &entry.name,
        parameters: entry.parameters.iter().cloned().collect(),
        backend: s.backend.to_string(),
        seed: s.seed,
    }
}

/// `sqrt(a^ik a^jl T_ij T_kl)`
fn norm2(a_inv: &[Vec<f64>], t: &[Vec<f64>]) -> f64 {
    let n = t.len();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    s += a_inv[i][k] * a_inv[j][l] * t[i][j] * t[k][l];
                }
            }
        }
    }
    s.max(0.0).sqrt()
}

fn norm1(a_inv: &[Vec<f64>], v: &[f64]) -> f64 {
    linalg::bilinear(a_inv, v, v).max(0.0).sqrt()
}

fn max_of(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, f64::max)
}

#[derive(Serialize)]
struct AlphaBlock {
    scalar_curvature: f64,
    ricci_norm: f64,
}

#[derive(Serialize)]
struct BetaBlock {
    b_norm: f64,
    r_norm: f64,
    s_norm: f64,
    t_norm: f64,
    s_vec_norm: f64,
    t_vec_norm: f64,
    divergence_norm: f64,
}

#[derive(Serialize)]
struct DirectionBlock {
    y: Vec<f64>,
    f: f64,
    flag_curvature_mean: f64,
    flag_variance: f64,
    flag_curvature_samples: Vec<f64>,
    ricci: f64,
    s_curvature: f64,
    distortion: f64,
    mean_cartan: Vec<f64>,
    mean_landsberg: Option<Vec<f64>>,
    j_bar: f64,
}

#[derive(Serialize)]
struct PointBlock {
    x: Vec<f64>,
    alpha: AlphaBlock,
    beta: BetaBlock,
    killing_residual: f64,
    directions: Vec<DirectionBlock>,
}

#[derive(Serialize)]
struct ReportDoc<'a> {
    #[serde(flatten)]
    header: Header<'a>,
    points_sampled: usize,
    flags: usize,
    killing_residual: f64,
    flag_curvature_mean: f64,
    flag_variance: f64,
    points: Vec<PointBlock>,
}

fn alpha_block(alpha: &AlphaData) -> AlphaBlock {
    let n = alpha.n;
    let scalar: f64 = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| alpha.a_inv[i][j] * alpha.ricci[i][j])
        .sum();
    AlphaBlock {
        scalar_curvature: scalar,
        ricci_norm: norm2(&alpha.a_inv, &alpha.ricci),
    }
}

fn beta_block(alpha: &AlphaData, beta: &BetaData) -> BetaBlock {
    BetaBlock {
        b_norm: beta.b2.max(0.0).sqrt(),
        r_norm: norm2(&alpha.a_inv, &beta.r),
        s_norm: norm2(&alpha.a_inv, &beta.s),
        t_norm: norm2(&alpha.a_inv, &beta.t),
        s_vec_norm: norm1(&alpha.a_inv, &beta.s_vec),
        t_vec_norm: norm1(&alpha.a_inv, &beta.t_vec),
        divergence_norm: norm1(&alpha.a_inv, &beta.div),
    }
}

/// `S`, `τ`, `I`, `J` and `J̄`: from the spray jet in coordinates, from the
/// closed forms in a frame.
fn f_invariants(
    metric: Option<&FinslerMetric>,
    x: &[f64],
    alpha: &AlphaData,
    beta: &BetaData,
    y: &[f64],
    backend: Backend,
) -> Result<(f64, f64, Vec<f64>, Option<Vec<f64>>, f64)> {
    if let Some(m) = metric {
        let d = non_riemannian(m, x, y, backend)?;
        return Ok((
            d.s_curvature,
            d.tau,
            d.mean_cartan,
            Some(d.mean_landsberg),
            d.j_bar,
        ));
    }
    let c = contract_with_y(beta, alpha, y)?;
    let rho0: f64 = rho_covector(beta).iter().zip(y).map(|(r, v)| r * v).sum();
    let g = randers_fundamental_tensor(alpha, beta, y)?;
    let (_, det) = linalg::inverse_det(&g).ok_or_else(|| Error::Singular("g_ij".into()))?;
    let tau = 0.5 * det.ln() - randers_sigma_bh(alpha, beta)?.ln();
    Ok((
        randers_s_curvature(&c, alpha.n, rho0),
        tau,
        randers_mean_cartan(alpha, beta, y)?,
        mean_landsberg_closed(&PhiFunction::Randers, alpha, beta, y).ok(),
        j_bar_closed(&PhiFunction::Randers, alpha, beta, y)?,
    ))
}

fn metric_of(entry: &CatalogEntry) -> Option<FinslerMetric> {
    match &entry.geometry {
        Geometry::Coordinate(spec) => Some(FinslerMetric::randers(spec.clone())),
        Geometry::Frame(_) => None,
    }
}

pub fn report<'a>(entry: &'a CatalogEntry, s: &Settings) -> Result<impl Serialize + 'a> {
    s.check()?;
    let subject = Subject::new(&entry.geometry, s.backend);
    let metric = metric_of(entry);
    let xs: Vec<(usize, Vec<f64>)> = entry
        .geometry
        .sample_points(s.points, s.seed)
        .into_iter()
        .enumerate()
        .collect();
    let blocks = s
        .exec
        .map(&xs, |(i, x)| -> Result<PointBlock> {
            let (alpha, beta) = subject.point_data(x)?;
            let mut directions = Vec::new();
            for (d, y) in Subject::directions(&alpha, s.directions, s.seed, *i as u64)
                .into_iter()
                .enumerate()
            {
                let jet = subject.direction_jet(x, &alpha, &beta, &y, 0)?;
                let stats = jet.scalar_flag_stats(s.flags, s.seed.wrapping_add(d as u64))?;
                let (sc, tau, i_vec, j_vec, j_bar) =
                    f_invariants(metric.as_ref(), x, &alpha, &beta, &y, s.backend)?;
                directions.push(DirectionBlock {
                    f: jet.f(),
                    flag_curvature_mean: stats.mean,
                    flag_variance: stats.variance,
                    flag_curvature_samples: stats.samples,
                    ricci: jet.ricci(),
                    s_curvature: sc,
                    distortion: tau,
                    mean_cartan: i_vec,
                    mean_landsberg: j_vec,
                    j_bar,
                    y,
                });
            }
            Ok(PointBlock {
                x: x.clone(),
                alpha: alpha_block(&alpha),
                beta: beta_block(&alpha, &beta),
                killing_residual: beta.killing_defect(),
                directions,
            })
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let all: Vec<&DirectionBlock> = blocks.iter().flat_map(|p| &p.directions).collect();
    Ok(ReportDoc {
        header: header("report", entry, s),
        points_sampled: blocks.len(),
        flags: s.flags,
        killing_residual: max_of(blocks.iter().map(|p| p.killing_residual)),
        flag_curvature_mean: all.iter().map(|d| d.flag_curvature_mean).sum::<f64>()
            / all.len() as f64,
        flag_variance: max_of(all.iter().map(|d| d.flag_variance)),
        points: blocks,
    })
}

#[derive(Serialize)]
struct ScreenDoc {
    schema: &'static str,
    command: &'static str,
    parameters: BTreeMap<String, f64>,
    #[serde(flatten)]
    report: ScreenerReport,
}

pub fn screen(entry: &CatalogEntry, s: &Settings) -> Result<(impl Serialize, i32)> {
    s.check()?;
    let plan = SamplePlan {
        points: s.points,
        directions: s.directions,
        flags: s.flags,
        seed: s.seed,
        backend: s.backend,
        exec: s.exec,
        tol: s.tol,
    };
    let report = run_screen(&entry.name, &entry.geometry, &plan)?;
    let code = report.verdict.exit_code();
    let doc = ScreenDoc {
        schema: SCHEMA,
        command: "screen",
        parameters: entry.parameters.iter().cloned().collect(),
        report,
    };
    Ok((doc, code))
}

const STATUS_CHECKED: &str = "CHECKED";
const STATUS_NOT_APPLICABLE: &str = "NOT_APPLICABLE";

#[derive(Serialize, Default)]
struct ScalarFlagCheck {
    status: &'static str,
    reason: Option<String>,
    s_identity_residual: Option<f64>,
    j_identity_residual: Option<f64>,
    flag_variance: f64,
}

#[derive(Serialize, Default)]
struct LemmaCheck {
    status: &'static str,
    reason: Option<String>,
    ricci_expansion_residual: Option<f64>,
    antisymmetric_residual: Option<f64>,
    symmetric_residual: Option<f64>,
    kappa: Option<f64>,
}

#[derive(Serialize)]
struct VerifyPoint {
    x: Vec<f64>,
    divergence_identity_residual: f64,
    closed_form_residuals: BTreeMap<&'static str, f64>,
    structure_residuals: BTreeMap<&'static str, f64>,
    scalar_flag_variance: f64,
    scalar_flag_identities: Option<(f64, f64)>,
    lemma_error: Option<String>,
    lemmas: Vec<LemmaResiduals>,
}

#[derive(Serialize)]
struct VerifyDoc<'a> {
    #[serde(flatten)]
    header: Header<'a>,
    tol: f64,
    passed: bool,
    divergence_identity_residual: f64,
    closed_form_residuals: BTreeMap<&'static str, f64>,
    structure_residuals: BTreeMap<&'static str, f64>,
    scalar_flag_identities: ScalarFlagCheck,
    lemmas: LemmaCheck,
    points: Vec<VerifyPoint>,
}

fn merge_max(into: &mut BTreeMap<&'static str, f64>, key: &'static str, v: f64) {
    let e = into.entry(key).or_insert(0.0);
    *e = e.max(v);
}

fn verify_point(
    subject: &Subject,
    metric: Option<&FinslerMetric>,
    x: &[f64],
    index: usize,
    s: &Settings,
) -> Result<VerifyPoint> {
    let (alpha, beta) = subject.point_data(x)?;
    let ys = Subject::directions(&alpha, s.directions, s.seed, index as u64);
    let mut p = VerifyPoint {
        x: x.to_vec(),
        divergence_identity_residual: 0.0,
        closed_form_residuals: BTreeMap::new(),
        structure_residuals: BTreeMap::new(),
        scalar_flag_variance: 0.0,
        scalar_flag_identities: None,
        lemma_error: None,
        lemmas: Vec::new(),
    };
    let mut jets = Vec::with_capacity(ys.len());
    for (d, y) in ys.iter().enumerate() {
        p.divergence_identity_residual = p
            .divergence_identity_residual
            .max(divergence_sides(&alpha, &beta, y).residual());
        let jet = subject.direction_jet(x, &alpha, &beta, y, 1)?;
        let stats = jet.scalar_flag_stats(s.flags, s.seed.wrapping_add(d as u64))?;
        p.scalar_flag_variance = p.scalar_flag_variance.max(stats.variance);
        jets.push(jet);
        if let Some(m) = metric {
            for (what, diff) in non_riemannian(m, x, y, s.backend)?.disagreements() {
                merge_max(&mut p.closed_form_residuals, what, diff);
            }
            for def in structure_defects(m, x, y, 1.7, s.backend)? {
                merge_max(&mut p.structure_residuals, def.quantity, def.defect);
            }
        }
    }
    if let Some(m) = metric {
        if p.scalar_flag_variance < SCALAR_FLAG_THRESHOLD {
            let (mut sr, mut jr) = (0.0f64, 0.0f64);
            for y in &ys {
                let id = scalar_flag_identities(m, x, y, s.flags, s.seed, s.backend)?;
                sr = sr.max(id.s_residual());
                jr = jr.max(id.j_residual());
            }
            p.scalar_flag_identities = Some((sr, jr));
        }
    }
    let ricci: Vec<f64> = jets.iter().map(|j| j.ricci()).collect();
    let lemmas = ricci_33_fit(&alpha, &beta, &ys, &ricci).and_then(|kappa| {
        jets.iter()
            .enumerate()
            .map(|(d, jet)| {
                lemma_residuals(
                    &alpha,
                    &beta,
                    kappa.value,
                    jet,
                    s.flags,
                    s.seed.wrapping_add(d as u64),
                )
            })
            .collect::<Result<Vec<_>>>()
    });
    match lemmas {
        Ok(l) => p.lemmas = l,
        Err(Error::NotApplicable(reason)) => p.lemma_error = Some(reason),
        Err(e) => return Err(e),
    }
    Ok(p)
}

pub fn verify<'a>(entry: &'a CatalogEntry, s: &Settings) -> Result<(impl Serialize + 'a, i32)> {
    s.check()?;
    let subject = Subject::new(&entry.geometry, s.backend);
    let metric = metric_of(entry);
    let xs: Vec<(usize, Vec<f64>)> = entry
        .geometry
        .sample_points(s.points, s.seed)
        .into_iter()
        .enumerate()
        .collect();
    let points = s
        .exec
        .map(&xs, |(i, x)| {
            verify_point(&subject, metric.as_ref(), x, *i, s)
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;

    let mut closed = BTreeMap::new();
    let mut structure = BTreeMap::new();
    for p in &points {
        for (k, v) in &p.closed_form_residuals {
            merge_max(&mut closed, k, *v);
        }
        for (k, v) in &p.structure_residuals {
            merge_max(&mut structure, k, *v);
        }
    }
    let flag_variance = max_of(points.iter().map(|p| p.scalar_flag_variance));
    let scalar_flag = if metric.is_none() {
        ScalarFlagCheck {
            status: STATUS_NOT_APPLICABLE,
            reason: Some("frame entries have no coordinate spray".into()),
            flag_variance,
            ..Default::default()
        }
    } else if points.iter().all(|p| p.scalar_flag_identities.is_some()) {
        ScalarFlagCheck {
            status: STATUS_CHECKED,
            reason: None,
            s_identity_residual: Some(max_of(
                points
                    .iter()
                    .filter_map(|p| p.scalar_flag_identities.map(|v| v.0)),
            )),
            j_identity_residual: Some(max_of(
                points
                    .iter()
                    .filter_map(|p| p.scalar_flag_identities.map(|v| v.1)),
            )),
            flag_variance,
        }
    } else {
        ScalarFlagCheck {
            status: STATUS_NOT_APPLICABLE,
            reason: Some(format!(
                "not of scalar flag curvature (flag variance {flag_variance:e})"
            )),
            flag_variance,
            ..Default::default()
        }
    };
    let lemmas = match points.iter().find_map(|p| p.lemma_error.clone()) {
        Some(reason) => LemmaCheck {
            status: STATUS_NOT_APPLICABLE,
            reason: Some(reason),
            ..Default::default()
        },
        None => {
            let all: Vec<&LemmaResiduals> = points.iter().flat_map(|p| &p.lemmas).collect();
            LemmaCheck {
                status: STATUS_CHECKED,
                reason: None,
                ricci_expansion_residual: Some(max_of(
                    all.iter().map(|l| l.ricci_expansion.residual),
                )),
                antisymmetric_residual: Some(max_of(all.iter().map(|l| l.antisymmetric.residual))),
                symmetric_residual: Some(max_of(all.iter().map(|l| l.symmetric.residual))),
                kappa: all.first().map(|l| l.kappa),
            }
        }
    };
    let divergence = max_of(points.iter().map(|p| p.divergence_identity_residual));
    let checked = [divergence]
        .into_iter()
        .chain(closed.values().copied())
        .chain(structure.values().copied())
        .chain(scalar_flag.s_identity_residual)
        .chain(scalar_flag.j_identity_residual)
        .chain(lemmas.ricci_expansion_residual)
        .chain(lemmas.antisymmetric_residual)
        .chain(lemmas.symmetric_residual);
    let passed = checked.fold(true, |ok, r| ok && r < s.tol);
    let doc = VerifyDoc {
        header: header("verify", entry, s),
        tol: s.tol,
        passed,
        divergence_identity_residual: divergence,
        closed_form_residuals: closed,
        structure_residuals: structure,
        scalar_flag_identities: scalar_flag,
        lemmas,
        points,
    };
    Ok((doc, if passed { 0 } else { 1 }))
}

pub fn geodesic(
    entry: &CatalogEntry,
    x0: &[f64],
    y0: &[f64],
    t_end: f64,
    h: f64,
) -> Result<String> {
    let Some(metric) = metric_of(entry) else {
        return Err(Error::NotApplicable(format!(
            "{} is a frame entry; geodesics need coordinates",
            entry.name
        )));
    };
    Ok(geodesic_trace(&metric, x0, y0, t_end, h)?.to_csv())
}
