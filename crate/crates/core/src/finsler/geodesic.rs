use serde::Serialize;

use crate::diffcore::Backend;
use crate::error::{Error, Result};

use super::spray::{FinslerMetric, SprayJet};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeodesicSample {
    pub t: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub f: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeodesicPath {
    pub samples: Vec<GeodesicSample>,
    /// Largest `|F(t) − F(0)| / F(0)` along the path.
    pub max_drift: f64,
}

impl GeodesicPath {
    /// `t,x1..xn,y1..yn,F` rows.
    pub fn to_csv(&self) -> String {
        let n = self.samples.first().map_or(0, |s| s.x.len());
        let mut head = vec!["t".to_string()];
        head.extend((1..=n).map(|i| format!("x{i}")));
        head.extend((1..=n).map(|i| format!("y{i}")));
        head.push("F".into());
        let mut out = head.join(",");
        out.push('\n');
        for s in &self.samples {
            let mut row = vec![format!("{:.16e}", s.t)];
            row.extend(s.x.iter().chain(&s.y).map(|v| format!("{v:.16e}")));
            row.push(format!("{:.16e}", s.f));
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

fn acceleration(metric: &FinslerMetric, x: &[f64], v: &[f64], t: f64) -> Result<Vec<f64>> {
    if !metric.spec.contains(x) {
        return Err(Error::GeodesicExit { t });
    }
    let jet = SprayJet::new(metric, x, v, 0, Backend::Dual)?;
    Ok(jet.spray().iter().map(|g| -2.0 * g).collect())
}

fn axpy(x: &[f64], k: f64, d: &[f64]) -> Vec<f64> {
    x.iter().zip(d).map(|(a, b)| a + k * b).collect()
}

/// Integrates `ẍ^i + 2G^i(x, ẋ) = 0` with classical RK4 and returns samples
/// at every step. Stops with an error when the path leaves the domain box or
/// when `F(x, ẋ)` drifts by more than 1e-3 relative.
pub fn geodesic_trace(
    metric: &FinslerMetric,
    x0: &[f64],
    y0: &[f64],
    t_end: f64,
    h: f64,
) -> Result<GeodesicPath> {
    if !(h > 0.0) || !(t_end >= 0.0) || !h.is_finite() || !t_end.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "need T ≥ 0 and h > 0, got T = {t_end}, h = {h}"
        )));
    }
    if !metric.spec.contains(x0) {
        return Err(Error::OutsideDomain { point: x0.to_vec() });
    }
    let f0 = metric.eval(x0, y0)?;
    if !(f0 > 1e-10) {
        return Err(Error::Irregular(format!("F(x0, y0) = {f0}")));
    }
    let steps = (t_end / h).round() as usize;
    let mut x = x0.to_vec();
    let mut v = y0.to_vec();
    let mut samples = vec![GeodesicSample {
        t: 0.0,
        x: x.clone(),
        y: v.clone(),
        f: f0,
    }];
    let mut max_drift: f64 = 0.0;
    for step in 0..steps {
        let t = step as f64 * h;
        let k1x = v.clone();
        let k1v = acceleration(metric, &x, &v, t)?;
        let (x2, v2) = (axpy(&x, h / 2.0, &k1x), axpy(&v, h / 2.0, &k1v));
        let k2v = acceleration(metric, &x2, &v2, t)?;
        let (x3, v3) = (axpy(&x, h / 2.0, &v2), axpy(&v, h / 2.0, &k2v));
        let k3v = acceleration(metric, &x3, &v3, t)?;
        let (x4, v4) = (axpy(&x, h, &v3), axpy(&v, h, &k3v));
        let k4v = acceleration(metric, &x4, &v4, t)?;
        let n = x.len();
        for i in 0..n {
            x[i] += h / 6.0 * (k1x[i] + 2.0 * v2[i] + 2.0 * v3[i] + v4[i]);
            v[i] += h / 6.0 * (k1v[i] + 2.0 * k2v[i] + 2.0 * k3v[i] + k4v[i]);
        }
        let t_next = (step + 1) as f64 * h;
        if !metric.spec.contains(&x) {
            return Err(Error::GeodesicExit { t: t_next });
        }
        let f = metric.eval(&x, &v)?;
        let drift = (f - f0).abs() / f0;
        if drift > 1e-3 {
            return Err(Error::GeodesicDrift { t: t_next, drift });
        }
        max_drift = max_drift.max(drift);
        samples.push(GeodesicSample {
            t: t_next,
            x: x.clone(),
            y: v.clone(),
            f,
        });
    }
    Ok(GeodesicPath { samples, max_drift })
}
