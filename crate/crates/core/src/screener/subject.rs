//! Uniform access to point data and direction jets for coordinate and
//! frame geometries.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::catalog::Geometry;
use crate::diffcore::Backend;
use crate::error::Result;
use crate::finsler::{deformation_jet, DirectionJet, FinslerMetric, SprayJet};
use crate::riemann::{AlphaData, BetaData};

pub struct Subject<'a> {
    pub geometry: &'a Geometry,
    pub backend: Backend,
    metric: Option<FinslerMetric>,
}

impl<'a> Subject<'a> {
    pub fn new(geometry: &'a Geometry, backend: Backend) -> Subject<'a> {
        let metric = match geometry {
            Geometry::Coordinate(spec) => Some(FinslerMetric::randers(spec.clone())),
            Geometry::Frame(_) => None,
        };
        Subject {
            geometry,
            backend,
            metric,
        }
    }

    pub fn point_data(&self, x: &[f64]) -> Result<(AlphaData, BetaData)> {
        self.geometry.point_data(x, self.backend)
    }

    /// `F`, `g` and `R^i_k` at `(x, y)` as series of order `y_order` in `y`.
    /// Frame subjects take `y` in frame components.
    pub fn direction_jet(
        &self,
        x: &[f64],
        alpha: &AlphaData,
        beta: &BetaData,
        y: &[f64],
        y_order: usize,
    ) -> Result<DirectionJet> {
        match &self.metric {
            Some(m) => {
                DirectionJet::from_spray(&SprayJet::new(m, x, y, y_order + 2, self.backend)?)
            }
            None => deformation_jet(alpha, beta, y, y_order),
        }
    }

    /// `count` seeded directions of unit `α`-length; stream `stream`
    /// keeps points independent of each other and of the evaluation order.
    pub fn directions(alpha: &AlphaData, count: usize, seed: u64, stream: u64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        let mut out = Vec::with_capacity(count);
        while out.len() < count {
            let y: Vec<f64> = (0..alpha.n)
                .map(|_| StandardNormal.sample(&mut rng))
                .collect();
            let a = alpha.norm(&y);
            if a > 1e-3 {
                out.push(y.iter().map(|v| v / a).collect());
            }
        }
        out
    }
}
