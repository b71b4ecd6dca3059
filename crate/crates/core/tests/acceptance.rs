//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit when any
//! criterion fails.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use randers_core::catalog::{
    self, bao_shen_frame, validate_chart, CatalogEntry, CatalogParams, Geometry, Surd, ENTRIES,
};
use randers_core::diffcore::Backend;
use randers_core::finsler::{
    bh_volume, closed, deformation_jet, fundamental_tensor, geodesic_trace, non_riemannian,
    nonlinear_connection, riemann_curvature, s_curvature, scalar_flag_identities,
    scalar_flag_variance, spray, structure_defects, FinslerMetric,
};
use randers_core::metricdsl::MetricSpec;
use randers_core::par::Execution;
use randers_core::riemann::{contract_with_y, divergence_residual, point_data, Ring};
use randers_core::screener::{screen, SamplePlan, Verdict};

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn params(k: f64, sign: i8) -> CatalogParams {
    CatalogParams {
        k: Some(k),
        sign: Some(sign),
        ..Default::default()
    }
}

fn coordinate(entry: &CatalogEntry) -> &MetricSpec {
    match &entry.geometry {
        Geometry::Coordinate(s) => s,
        Geometry::Frame(_) => panic!("{} is a frame entry", entry.name),
    }
}

fn coordinate_entries() -> Vec<CatalogEntry> {
    ENTRIES
        .iter()
        .map(|e| catalog::build(e.name, &CatalogParams::default()).unwrap())
        .filter(|e| !e.geometry.is_frame())
        .collect()
}

fn random_direction(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

/// Exact covariant tables of the Bao-Shen frame.
fn exact_frame_tables() -> Outcome {
    for k in [2.0, 4.0] {
        for sign in [1i8, -1] {
            let space = bao_shen_frame(k, sign).map_err(err)?;
            let (eps, delta) = (space.field.epsilon(), space.field.delta());
            let beta = space.beta_exact();
            let zero = Surd::zero();
            let label = format!("K = {k}, sign {sign}");
            for i in 0..3 {
                for j in 0..3 {
                    let expect = match (i, j) {
                        (1, 2) => -delta,
                        (2, 1) => delta,
                        _ => zero,
                    };
                    ensure(beta.b_cov[i][j] == expect, || {
                        format!("{label}: b_{{{};{}}} = {}", i + 1, j + 1, beta.b_cov[i][j])
                    })?;
                    ensure(beta.s[i][j] == expect, || {
                        format!("{label}: s_{}{} = {}", i + 1, j + 1, beta.s[i][j])
                    })?;
                    ensure(beta.r[i][j] == zero, || format!("{label}: r ≠ 0"))?;
                    let t = if i == j && i > 0 {
                        -(delta * delta)
                    } else {
                        zero
                    };
                    ensure(beta.t[i][j] == t, || {
                        format!("{label}: t_{}{} = {}", i + 1, j + 1, beta.t[i][j])
                    })?;
                }
                ensure(beta.s_vec[i] == zero, || {
                    format!("{label}: s_{} ≠ 0", i + 1)
                })?;
                ensure(beta.t_vec[i] == zero, || {
                    format!("{label}: t_{} ≠ 0", i + 1)
                })?;
                let two = Surd::from_ratio(2, 1);
                let div = if i == 0 { two * delta * eps } else { zero };
                ensure(beta.div[i] == div, || {
                    format!("{label}: D_{} = {}", i + 1, beta.div[i])
                })?;
            }
        }
    }
    Ok("exact for K ∈ {2, 4}, both signs".into())
}

/// Screener on both realizations of Bao-Shen.
fn bao_shen_screening() -> Outcome {
    let plan = SamplePlan::default();
    let mut worst: f64 = 0.0;
    for name in ["bao-shen", "bao-shen-frame"] {
        for k in [2.0, 4.0] {
            let entry = catalog::build(name, &params(k, 1)).map_err(err)?;
            let r = screen(name, &entry.geometry, &plan).map_err(err)?;
            let label = format!("{name} K = {k}");
            ensure(r.verdict == Verdict::NecessaryPass, || {
                format!("{label}: {:?}", r.verdict)
            })?;
            let (c, lambda) = (r.c.unwrap_or(f64::NAN), r.lambda.unwrap_or(f64::NAN));
            ensure((c + (k - 1.0)).abs() < 1e-8, || format!("{label}: c = {c}"))?;
            ensure((lambda - k).abs() < 1e-8, || {
                format!("{label}: λ = {lambda}")
            })?;
            for (eq, v) in [
                ("eq_1_3", r.residuals.eq_1_3),
                ("eq_1_2", r.residuals.eq_1_2),
                ("eq_1_5", r.residuals.eq_1_5),
            ] {
                let v = v.unwrap_or(f64::NAN);
                ensure(v < 1e-8, || format!("{label}: {eq} residual {v:e}"))?;
                worst = worst.max(v);
            }
        }
    }
    Ok(format!("c = 1 − K, λ = K, worst residual {worst:.1e}"))
}

/// Flag curvature and Ricci curvature of the chart realization.
fn constant_flag_curvature() -> Outcome {
    let mut worst_k: f64 = 0.0;
    let mut worst_ric: f64 = 0.0;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for k in [2.0, 4.0] {
        let entry = catalog::build("bao-shen", &params(k, 1)).map_err(err)?;
        let spec = coordinate(&entry);
        let m = FinslerMetric::randers(spec.clone());
        for (p, x) in spec.interior_samples(5, 17, 0.1).iter().enumerate() {
            let y = random_direction(&mut rng, 3);
            let st = scalar_flag_variance(&m, x, &y, 50, p as u64, Backend::Dual).map_err(err)?;
            for s in &st.samples {
                worst_k = worst_k.max((s - k).abs());
            }
            let c = riemann_curvature(&m, x, &y, Backend::Dual).map_err(err)?;
            let target = 2.0 * k * c.f * c.f;
            worst_ric = worst_ric.max((c.ricci - target).abs() / target.abs());
        }
    }
    ensure(worst_k < 1e-6, || format!("|K − K₀| = {worst_k:e}"))?;
    ensure(worst_ric < 1e-8, || {
        format!("Ric relative defect {worst_ric:e}")
    })?;
    Ok(format!(
        "50 flags × 5 points: |K − K₀| ≤ {worst_k:.1e}, Ric defect ≤ {worst_ric:.1e}"
    ))
}

/// Divergence identity on seeded random pairs.
fn divergence_identity() -> Outcome {
    let started = Instant::now();
    let cases: Vec<(u64, usize)> = (0..10)
        .map(|s| (s, 3))
        .chain((0..10).map(|s| (100 + s, 4)))
        .collect();
    let worst = Execution::Parallel
        .map(&cases, |&(seed, n)| -> Result<f64, String> {
            let entry = catalog::random_metric(seed, n, 2).map_err(err)?;
            let spec = coordinate(&entry);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut worst: f64 = 0.0;
            for x in spec.interior_samples(10, seed, 0.1) {
                for _ in 0..5 {
                    let y = random_direction(&mut rng, n);
                    worst = worst.max(divergence_residual(spec, &x, &y).map_err(err)?);
                }
            }
            Ok(worst)
        })
        .into_iter()
        .try_fold(0.0f64, |m, r| r.map(|v| m.max(v)))?;
    let secs = started.elapsed().as_secs_f64();
    ensure(worst < 1e-6, || format!("residual {worst:e}"))?;
    Ok(format!(
        "20 pairs × 10 points × 5 directions, worst {worst:.1e} in {secs:.2} s"
    ))
}

/// Closed forms against definitions on every coordinate entry.
fn closed_form_oracles() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut worst_mc: f64 = 0.0;
    for entry in coordinate_entries() {
        let spec = coordinate(&entry);
        let m = FinslerMetric::randers(spec.clone());
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for x in spec.interior_samples(4, 9, 0.2) {
            let y = random_direction(&mut rng, spec.n);
            let label = format!("{} at {x:?}", entry.name);
            let data =
                non_riemannian(&m, &x, &y, Backend::Dual).map_err(|e| format!("{label}: {e}"))?;
            for (what, d) in data.disagreements() {
                ensure(d < 1e-6, || format!("{label}: {what} disagrees by {d:e}"))?;
                worst = worst.max(d);
            }
            fundamental_tensor(&m, &x, &y, Backend::Dual).map_err(|e| format!("{label}: {e}"))?;
            spray(&m, &x, &y, Backend::Dual).map_err(|e| format!("{label}: {e}"))?;
            nonlinear_connection(&m, &x, &y, Backend::Dual).map_err(|e| format!("{label}: {e}"))?;
        }
        let x = spec.center();
        let v = bh_volume(&m, &x, 1_000_000, 21, Execution::Parallel).map_err(err)?;
        let closed = v.closed_form.unwrap_or(f64::NAN);
        let rel = (v.monte_carlo - closed).abs() / closed;
        ensure(rel < 0.01, || {
            format!(
                "{}: σ_BH {closed} vs Monte-Carlo {}",
                entry.name, v.monte_carlo
            )
        })?;
        worst_mc = worst_mc.max(rel);
    }
    Ok(format!(
        "S, I, J, J̄, g, G, N agree to {worst:.1e}; σ_BH Monte-Carlo within {:.2}%",
        100.0 * worst_mc
    ))
}

/// `J_{i|m}y^m + K F² I_i = 0` and the S-identity on the chart.
fn landsberg_identity() -> Outcome {
    let mut worst_j: f64 = 0.0;
    let mut worst_s: f64 = 0.0;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for k in [2.0, 4.0] {
        let entry = catalog::build("bao-shen", &params(k, 1)).map_err(err)?;
        let spec = coordinate(&entry);
        let m = FinslerMetric::randers(spec.clone());
        for x in spec.interior_samples(3, 23, 0.1) {
            let y = random_direction(&mut rng, 3);
            let id = scalar_flag_identities(&m, &x, &y, 8, 1, Backend::Dual).map_err(err)?;
            worst_j = worst_j.max(id.j_residual());
            let s = id
                .s_lhs
                .iter()
                .chain(&id.s_rhs)
                .fold(0.0f64, |a, v| a.max(v.abs()));
            worst_s = worst_s.max(s);
            let sc = s_curvature(&m, &x, &y, Backend::Dual).map_err(err)?;
            worst_s = worst_s.max(sc.s.abs()).max(sc.s_spray.abs());
        }
    }
    ensure(worst_j < 1e-5, || {
        format!("J-identity residual {worst_j:e}")
    })?;
    ensure(worst_s < 1e-5, || format!("S-identity terms {worst_s:e}"))?;
    Ok(format!(
        "J-identity {worst_j:.1e}, S and its identity terms ≤ {worst_s:.1e}"
    ))
}

/// Rotational Killing form: FAIL on the first necessary condition with
/// residual > 0.3, and a non-scalar flag curvature.
fn rotational_negative_control() -> Outcome {
    let entry = catalog::build(
        "euclid-rot-killing",
        &CatalogParams {
            q: Some(0.3),
            radius: Some(1.5),
            ..Default::default()
        },
    )
    .map_err(err)?;
    let r = screen(&entry.name, &entry.geometry, &SamplePlan::default()).map_err(err)?;
    let observed = format!(
        "verdict {:?}, eq_1_3 residual {:?}, flag variance {:.3e}",
        r.verdict, r.residuals.eq_1_3, r.flag_variance
    );
    ensure(r.flag_variance > 1e-3, || {
        format!("flag variance too small; {observed}")
    })?;
    match &r.verdict {
        Verdict::Fail {
            failed, residual, ..
        } if failed == "eq_1_3" && *residual > 0.3 => Ok(observed),
        _ => Err(format!(
            "expected FAIL(eq_1_3) with residual > 0.3; {observed}"
        )),
    }
}

/// Funk metric: `K = −1/4`, `S = (n+1)F/2`, not Killing.
fn funk_validation() -> Outcome {
    let entry = catalog::build("funk-ball", &CatalogParams::default()).map_err(err)?;
    let spec = coordinate(&entry);
    let m = FinslerMetric::randers(spec.clone());
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let (mut worst_k, mut worst_s): (f64, f64) = (0.0, 0.0);
    for (p, x) in spec.interior_samples(5, 29, 0.1).iter().enumerate() {
        let y = random_direction(&mut rng, 3);
        let st = scalar_flag_variance(&m, x, &y, 20, p as u64, Backend::Dual).map_err(err)?;
        for s in &st.samples {
            worst_k = worst_k.max((s + 0.25).abs());
        }
        let f = m.eval(x, &y).map_err(err)?;
        let sc = s_curvature(&m, x, &y, Backend::Dual).map_err(err)?;
        let target = 2.0 * f;
        worst_s = worst_s
            .max((sc.s - target).abs() / target)
            .max((sc.s_spray - target).abs() / target);
    }
    ensure(worst_k < 1e-6, || format!("|K + 1/4| = {worst_k:e}"))?;
    ensure(worst_s < 1e-6, || format!("S defect {worst_s:e}"))?;
    let r = screen(&entry.name, &entry.geometry, &SamplePlan::default()).map_err(err)?;
    match &r.verdict {
        Verdict::NotApplicable { reason, .. } if reason == "beta_not_killing" => Ok(format!(
            "|K + 1/4| ≤ {worst_k:.1e}, S defect ≤ {worst_s:.1e} on both paths, NOT_APPLICABLE"
        )),
        v => Err(format!("verdict {v:?}")),
    }
}

/// Homogeneity, structure identities and geodesic conservation of `F`.
fn structure_suites() -> Outcome {
    let entries = coordinate_entries();
    let results = Execution::Parallel.map(&entries, |entry| -> Result<(f64, f64), String> {
        let spec = coordinate(entry);
        let m = FinslerMetric::randers(spec.clone());
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let mut worst: f64 = 0.0;
        for x in spec.interior_samples(50, 37, 0.1) {
            let y = random_direction(&mut rng, spec.n);
            let lambda = rng.gen_range(0.5..3.0);
            for d in structure_defects(&m, &x, &y, lambda, Backend::Dual).map_err(err)? {
                let tol = match d.quantity {
                    "g(y,y) - F^2" | "I y" | "J y" => 1e-10,
                    _ => 1e-8,
                };
                ensure(d.defect < tol, || {
                    format!(
                        "{}: {} defect {:e} at {x:?}",
                        entry.name, d.quantity, d.defect
                    )
                })?;
                worst = worst.max(d.defect);
            }
        }
        let x0 = spec.center();
        let half = spec
            .domain
            .iter()
            .map(|&(lo, hi)| 0.5 * (hi - lo))
            .fold(f64::INFINITY, f64::min);
        let y0: Vec<f64> = {
            let v = random_direction(&mut rng, spec.n);
            let len = v.iter().map(|a| a * a).sum::<f64>().sqrt();
            v.iter().map(|a| 0.3 * half * a / len).collect()
        };
        let path =
            geodesic_trace(&m, &x0, &y0, 1.0, 1e-3).map_err(|e| format!("{}: {e}", entry.name))?;
        ensure(path.max_drift < 1e-6, || {
            format!("{}: geodesic drift {:e}", entry.name, path.max_drift)
        })?;
        Ok((worst, path.max_drift))
    });
    let (mut worst, mut drift): (f64, f64) = (0.0, 0.0);
    for r in results {
        let (w, d) = r?;
        worst = worst.max(w);
        drift = drift.max(d);
    }
    Ok(format!(
        "{} entries × 50 samples, worst defect {worst:.1e}, geodesic drift {drift:.1e}",
        entries.len()
    ))
}

/// Chart structure equations and frame/chart agreement of scalar invariants.
fn chart_validation() -> Outcome {
    let (mut worst_chart, mut worst_agree): (f64, f64) = (0.0, 0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for k in [2.0, 4.0] {
        for sign in [1i8, -1] {
            let chart = catalog::build("bao-shen", &params(k, sign)).map_err(err)?;
            worst_chart = worst_chart.max(validate_chart(&chart).map_err(err)?);
            let frame = catalog::build("bao-shen-frame", &params(k, sign)).map_err(err)?;
            let (fa, fb) = frame
                .geometry
                .point_data(&[0.0; 3], Backend::Dual)
                .map_err(err)?;
            let spec = coordinate(&chart);
            let m = FinslerMetric::randers(spec.clone());
            let coframe = chart.coframe.as_ref().ok_or("chart without coframe")?;
            for x in spec.interior_samples(5, 43, 0.1) {
                let y = random_direction(&mut rng, 3);
                let yf = coframe.to_frame(&x, &y).map_err(err)?;
                let dj = deformation_jet(&fa, &fb, &yf, 0).map_err(err)?;
                let fs = dj.scalar_flag_stats(8, 1).map_err(err)?;
                let c = riemann_curvature(&m, &x, &y, Backend::Dual).map_err(err)?;
                let cs = scalar_flag_variance(&m, &x, &y, 8, 1, Backend::Dual).map_err(err)?;
                let nr = non_riemannian(&m, &x, &y, Backend::Dual).map_err(err)?;
                let cf = contract_with_y(&fb, &fa, &yf).map_err(err)?;
                let cb = chart_b2(spec, &x)?;
                let pairs = [
                    ("F", dj.f(), c.f),
                    ("Ric", dj.ricci(), c.ricci),
                    ("K", fs.mean, cs.mean),
                    ("b²", fb.b2, cb),
                    (
                        "S",
                        closed::killing_s_curvature(&cf, 3, 0.0),
                        nr.s_curvature_spray,
                    ),
                    (
                        "J̄",
                        closed::killing_j_bar(&fa, &fb, &yf).map_err(err)?,
                        nr.j_bar,
                    ),
                ];
                for (what, a, b) in pairs {
                    let d = (a - b).abs() / (1.0 + a.abs().max(b.abs()));
                    ensure(d < 1e-6, || {
                        format!("K = {k}, sign {sign}: {what} {a} vs {b}")
                    })?;
                    worst_agree = worst_agree.max(d);
                }
            }
        }
    }
    ensure(worst_chart < 1e-8, || {
        format!("structure residual {worst_chart:e}")
    })?;
    Ok(format!(
        "structure residual {worst_chart:.1e}, frame/chart agreement {worst_agree:.1e}"
    ))
}

fn chart_b2(spec: &MetricSpec, x: &[f64]) -> Result<f64, String> {
    let (_, beta) = point_data(spec, x, Backend::Dual).map_err(err)?;
    Ok(beta.b2)
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("exact frame tables", exact_frame_tables),
        (
            "Bao-Shen passes the necessary conditions",
            bao_shen_screening,
        ),
        ("constant flag curvature", constant_flag_curvature),
        ("divergence identity", divergence_identity),
        ("closed forms against definitions", closed_form_oracles),
        ("Landsberg identity", landsberg_identity),
        ("rotational negative control", rotational_negative_control),
        ("Funk metric", funk_validation),
        ("homogeneity and structure suites", structure_suites),
        ("chart validation", chart_validation),
    ];
    let mut failed = Vec::new();
    for (i, (name, check)) in criteria.iter().enumerate() {
        let started = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let secs = started.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!(
                "criterion {:>2} PASS  {name}: {detail} ({secs:.2} s)",
                i + 1
            ),
            Err(detail) => {
                println!(
                    "criterion {:>2} FAIL  {name}: {detail} ({secs:.2} s)",
                    i + 1
                );
                failed.push(i + 1);
            }
        }
    }
    if !failed.is_empty() {
        println!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
