use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_randers-lab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "{e}: {}\n{}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

fn num(v: &Value) -> f64 {
    v.as_f64().unwrap_or_else(|| panic!("not a number: {v}"))
}

/// Every number below `key` in `v`, at any depth.
fn numbers_under<'a>(v: &'a Value, key: &str, out: &mut Vec<&'a Value>) {
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                if k == key {
                    collect_numbers(x, out);
                } else {
                    numbers_under(x, key, out);
                }
            }
        }
        Value::Array(a) => a.iter().for_each(|x| numbers_under(x, key, out)),
        _ => {}
    }
}

fn collect_numbers<'a>(v: &'a Value, out: &mut Vec<&'a Value>) {
    match v {
        Value::Number(_) => out.push(v),
        Value::Object(m) => m.values().for_each(|x| collect_numbers(x, out)),
        Value::Array(a) => a.iter().for_each(|x| collect_numbers(x, out)),
        _ => {}
    }
}

#[test]
fn bao_shen_screen_passes_with_its_constants() {
    let out = run(&["screen", "--catalog", "bao-shen", "--K", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["schema"], "randers-lab/1");
    assert_eq!(v["verdict"], "NECESSARY_PASS");
    assert!((num(&v["c"]) + 1.0).abs() < 1e-8);
    assert!((num(&v["lambda"]) - 2.0).abs() < 1e-8);
}

#[test]
fn rotational_killing_form_fails_the_screen() {
    let out = run(&["screen", "--catalog", "euclid-rot-killing", "--q", "0.3"]);
    assert_eq!(out.status.code(), Some(1));
    let v = json(&out);
    assert_eq!(v["verdict"], "FAIL");
    assert!(v["failed"].as_str().unwrap().starts_with("eq_"));
    assert!(num(&v["residual"]) > 1e-3);
    assert!(num(&v["flag_variance"]) > 1e-3);
}

#[test]
fn funk_metric_is_not_applicable() {
    let out = run(&["screen", "--catalog", "funk-ball"]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(json(&out)["reason"], "beta_not_killing");
}

#[test]
fn report_on_bao_shen_has_constant_flag_curvature() {
    let out = run(&[
        "report",
        "--catalog",
        "bao-shen",
        "--K",
        "4",
        "--points",
        "5",
        "--seed",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!((num(&v["flag_curvature_mean"]) - 4.0).abs() < 1e-6);
    assert_eq!(v["points"].as_array().unwrap().len(), 5);
}

#[test]
fn report_on_euclidean_space_is_flat() {
    let v = json(&run(&["report", "--catalog", "euclidean"]));
    let mut values = Vec::new();
    for key in [
        "alpha",
        "beta",
        "flag_curvature_samples",
        "ricci",
        "s_curvature",
        "mean_cartan",
        "mean_landsberg",
        "j_bar",
        "flag_curvature_mean",
    ] {
        numbers_under(&v, key, &mut values);
    }
    assert!(values.len() > 100);
    assert!(values.iter().all(|x| num(x).abs() < 1e-12));
}

#[test]
fn malformed_spec_exits_2_with_the_offset() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(
        &path,
        r#"{"name": "bad", "n": 2, "a": {"11": "1 +* x1", "22": "1"}, "b": ["0", "0"],
            "domain": [[-1, 1], [-1, 1]]}"#,
    )
    .unwrap();
    let out = run(&["report", "--spec", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("a11") && err.contains("offset 4"), "{err}");
}

#[test]
fn missing_spec_and_unknown_entry_are_input_errors() {
    assert_eq!(
        run(&["screen", "--spec", "/nonexistent.json"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(run(&["screen", "--catalog", "nope"]).status.code(), Some(2));
    assert_eq!(
        run(&["screen", "--catalog", "euclidean", "--tol", "-1"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn euclidean_geodesic_is_a_straight_line() {
    let out = run(&[
        "geodesic",
        "--catalog",
        "euclidean",
        "--x0",
        "0,0,0",
        "--y0",
        "1,0,0",
        "--T",
        "1",
        "--h",
        "0.001",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,x1,x2,x3,y1,y2,y3,F"));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 1001);
    for r in &rows {
        assert!((r[1] - r[0]).abs() < 1e-12 && r[2] == 0.0 && r[3] == 0.0);
        assert!((r[7] - 1.0).abs() < 1e-15);
    }
}

#[test]
fn geodesic_on_a_frame_entry_is_refused() {
    let out = run(&[
        "geodesic",
        "--catalog",
        "bao-shen-frame",
        "--x0",
        "0,0,0",
        "--y0",
        "1,0,0",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_bao_shen_passes() {
    let out = run(&["verify", "--catalog", "bao-shen", "--K", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["passed"], true);
    assert_eq!(v["lemmas"]["status"], "CHECKED");
    assert_eq!(v["scalar_flag_identities"]["status"], "CHECKED");
    let mut values = Vec::new();
    for key in [
        "divergence_identity_residual",
        "closed_form_residuals",
        "structure_residuals",
        "s_identity_residual",
        "j_identity_residual",
        "ricci_expansion_residual",
        "antisymmetric_residual",
        "symmetric_residual",
    ] {
        let before = values.len();
        numbers_under(&v, key, &mut values);
        assert!(values.len() > before, "{key} missing");
    }
    assert!(values.iter().all(|x| num(x) < 1e-5));
}

#[test]
fn verify_random_metric_skips_the_scalar_flag_checks() {
    let out = run(&["verify", "--catalog", "random", "--seed", "7"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!(num(&v["divergence_identity_residual"]) < 1e-6);
    assert_eq!(v["lemmas"]["status"], "NOT_APPLICABLE");
    assert_eq!(v["scalar_flag_identities"]["status"], "NOT_APPLICABLE");
}

#[test]
fn output_is_byte_identical_across_runs_and_modes() {
    let args = ["screen", "--catalog", "random-killing", "--seed", "3"];
    let a = run(&args);
    let b = run(&args);
    let mut seq = args.to_vec();
    seq.push("--sequential");
    let c = run(&seq);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout, c.stdout);
    let g = [
        "geodesic",
        "--catalog",
        "random",
        "--x0",
        "0,0,0",
        "--y0",
        "0.2,0.1,-0.1",
    ];
    assert_eq!(run(&g).stdout, run(&g).stdout);
}

#[test]
fn out_writes_the_same_document_and_nothing_else() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let args = ["report", "--catalog", "sphere-product", "--points", "2"];
    let stdout = run(&args).stdout;
    let mut with_out = args.to_vec();
    with_out.extend(["--out", path.to_str().unwrap()]);
    let out = run(&with_out);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    assert_eq!(std::fs::read(&path).unwrap(), stdout);
    let files: Vec<_> = std::fs::read_dir(dir.path()).unwrap().collect();
    assert_eq!(files.len(), 1);
}

fn export(name: &str, extra: &[&str], dir: &Path) -> String {
    let path = dir.join(format!("{name}.json"));
    let mut args = vec!["catalog", "export", name, "--out", path.to_str().unwrap()];
    args.extend(extra);
    assert_eq!(run(&args).status.code(), Some(0));
    path.to_str().unwrap().to_string()
}

#[test]
fn exported_entries_screen_like_the_catalog() {
    let dir = tempfile::tempdir().unwrap();
    for (name, extra) in [
        ("bao-shen", &["--K", "4"][..]),
        ("euclid-rot-killing", &[][..]),
        ("funk-ball", &[][..]),
    ] {
        let spec = export(name, extra, dir.path());
        let from_file = run(&["screen", "--spec", &spec]);
        let mut args = vec!["screen", "--catalog", name];
        args.extend(extra);
        let from_catalog = run(&args);
        assert_eq!(
            from_file.status.code(),
            from_catalog.status.code(),
            "{name}"
        );
        let (a, b) = (json(&from_file), json(&from_catalog));
        assert_eq!(a["c"], b["c"], "{name}");
        assert_eq!(a["lambda"], b["lambda"], "{name}");
    }
}

#[test]
fn catalog_lists_every_entry_and_refuses_to_export_frames() {
    let out = run(&["catalog", "list"]);
    let text = String::from_utf8(out.stdout).unwrap();
    for name in [
        "euclidean",
        "euclid-rot-killing",
        "funk-ball",
        "random",
        "bao-shen",
        "bao-shen-frame",
    ] {
        assert!(text.lines().any(|l| l.starts_with(name)), "{name}");
    }
    assert_eq!(
        run(&["catalog", "export", "bao-shen-frame"]).status.code(),
        Some(2)
    );
}
