use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::diffcore::Backend;
use crate::error::{Error, Result};
use crate::par::Execution;
use crate::riemann::point_data;

use super::closed::randers_sigma_bh;
use super::spray::{finsler_function, FinslerMetric};

const CHUNK: usize = 1 << 15;

/// Busemann–Hausdorff volume density by the closed form (Randers only) and
/// by Monte-Carlo.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BhVolume {
    pub closed_form: Option<f64>,
    pub monte_carlo: f64,
    /// One standard error of the Monte-Carlo estimate.
    pub standard_error: f64,
    pub samples: usize,
}

/// Volume of the Euclidean unit ball in `R^n`.
pub fn unit_ball_volume(n: usize) -> f64 {
    match n {
        0 => 1.0,
        1 => 2.0,
        _ => 2.0 * std::f64::consts::PI / n as f64 * unit_ball_volume(n - 2),
    }
}

/// `σ_BH(x) = Vol(Bⁿ(1)) / Vol{y : F(x, y) < 1}`. The Monte-Carlo estimate
/// samples a cube enclosing the indicatrix; chunk `c` draws from stream `c`
/// of a seeded ChaCha generator, so the result does not depend on `exec`.
pub fn bh_volume(
    metric: &FinslerMetric,
    x: &[f64],
    samples: usize,
    seed: u64,
    exec: Execution,
) -> Result<BhVolume> {
    let n = metric.n();
    let (alpha, beta) = point_data(&metric.spec, x, Backend::Dual)?;
    if beta.b2 >= 1.0 {
        return Err(Error::RandersNorm {
            point: x.to_vec(),
            norm: beta.b2.sqrt(),
        });
    }
    let closed_form = if metric.is_randers() {
        Some(randers_sigma_bh(&alpha, &beta)?)
    } else {
        None
    };
    if samples == 0 {
        return Err(Error::InvalidParameter(
            "Monte-Carlo sample count must be positive".into(),
        ));
    }
    let eig = nalgebra::DMatrix::from_fn(n, n, |i, j| alpha.a[i][j]).symmetric_eigenvalues();
    let lambda_min = eig.iter().cloned().fold(f64::INFINITY, f64::min);
    // F ≥ α(1 − |b|) puts the indicatrix inside an α-ball, hence inside this cube
    let half = 1.0001 / ((1.0 - beta.b2.sqrt()) * lambda_min.sqrt());
    let a = alpha.a.clone();
    let b = beta.b.clone();
    let chunks = samples.div_ceil(CHUNK);
    let hits = exec.sum_range(chunks, |c| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(c as u64);
        let count = CHUNK.min(samples - c * CHUNK);
        let mut y = vec![0.0; n];
        let mut inside = 0usize;
        for _ in 0..count {
            for v in y.iter_mut() {
                *v = rng.gen_range(-half..half);
            }
            if finsler_function(&metric.phi, &a, &b, &y).map_or(false, |f| f < 1.0) {
                inside += 1;
            }
        }
        inside as f64
    });
    let frac = hits / samples as f64;
    if frac == 0.0 {
        return Err(Error::InvalidParameter(
            "no Monte-Carlo sample fell inside the indicatrix".into(),
        ));
    }
    let cube = (2.0 * half).powi(n as i32);
    let monte_carlo = unit_ball_volume(n) / (frac * cube);
    let rel = ((1.0 - frac) / (frac * samples as f64)).sqrt();
    Ok(BhVolume {
        closed_form,
        monte_carlo,
        standard_error: monte_carlo * rel,
        samples,
    })
}
