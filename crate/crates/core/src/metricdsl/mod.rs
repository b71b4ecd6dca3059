//! Expression language for metric components and the metric document format.

mod expr;
mod parser;
mod spec;

pub use expr::{BinOp, Expr, Func};
pub use parser::{parse, parse_for, ParseError};
pub use spec::{
    load_metric_spec, MetricDocument, MetricSpec, VALIDATION_LATTICE, VALIDATION_SAMPLES,
    VALIDATION_SEED,
};

/// Evaluates an expression over any scalar tower.
pub fn eval_expr<T: crate::diffcore::Scalar>(
    e: &Expr,
    x: &[T],
) -> Result<T, crate::error::EvalError> {
    e.eval(x)
}
