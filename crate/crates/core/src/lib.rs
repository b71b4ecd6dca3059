//! Numerical Finsler geometry for Randers metrics `F = α + β`.
//!
//! The crate computes Riemannian data of `α`, the tensors derived from `β`,
//! the spray and curvature of `F`, its non-Riemannian invariants, and a
//! screener for the necessary conditions a Killing-form Randers metric of
//! scalar flag curvature has to satisfy.

pub mod catalog;
pub mod diffcore;
pub mod error;
pub mod finsler;
pub mod metricdsl;
pub mod par;
pub mod riemann;
pub mod screener;

pub use error::{Error, EvalError, Result};
