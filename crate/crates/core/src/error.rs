use thiserror::Error;

use crate::metricdsl::ParseError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Failure while evaluating an expression or map over the scalar tower.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("domain violation in `{node}`: {reason}")]
    Domain { node: String, reason: String },
    #[error("non-finite value produced at {point:?}")]
    NonFinite { point: Vec<f64> },
    #[error("variable x{index} is not bound (arity {arity})")]
    UnboundVariable { index: usize, arity: usize },
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("component {component}: {source}")]
    Component {
        component: String,
        source: ParseError,
    },
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("derivative order {0} not supported (max 3)")]
    OrderTooHigh(usize),
    #[error("arity mismatch: expected {expected}, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("invalid metric document: {0}")]
    InvalidSpec(String),
    #[error("a_ij is not positive definite at {point:?} (eigenvalue {eigenvalue})")]
    NotPositiveDefinite { point: Vec<f64>, eigenvalue: f64 },
    #[error("Randers condition violated at {point:?}: |beta|_alpha = {norm} >= 1")]
    RandersNorm { point: Vec<f64>, norm: f64 },
    #[error("singular matrix: {0}")]
    Singular(String),
    #[error("direction y is too small (|y| = {norm})")]
    DegenerateDirection { norm: f64 },
    #[error("degenerate flag (denominator {denominator})")]
    DegenerateFlag { denominator: f64 },
    #[error("metric is not regular here: {0}")]
    Irregular(String),
    #[error("not applicable: {0}")]
    NotApplicable(String),
    #[error("point {point:?} lies outside the domain box")]
    OutsideDomain { point: Vec<f64> },
    #[error("geodesic left the domain at t = {t}")]
    GeodesicExit { t: f64 },
    #[error("geodesic step rejected at t = {t}: F drifted by {drift:e}")]
    GeodesicDrift { t: f64, drift: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("{what}: two computation paths disagree by {diff:e}")]
    Inconsistent { what: String, diff: f64 },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
