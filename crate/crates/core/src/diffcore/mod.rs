//! Forward-mode differentiation: dual towers, truncated Taylor series and a
//! finite-difference oracle.

mod dual;
mod jet;
pub mod linalg;
mod scalar;
mod taylor;

pub use dual::{Dual, Dual2, Dual3};
pub use jet::{
    evaluate_jet, finite_difference_jet, jet_agreement, symmetry_residual, Backend, JetTable,
    SmoothMap,
};
pub use scalar::{dot, sum, Scalar};
pub use taylor::{Layout, Taylor, MAX_ORDER};
