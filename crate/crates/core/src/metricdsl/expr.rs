use std::fmt;

use crate::diffcore::Scalar;
use crate::error::EvalError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Sqrt,
    Sin,
    Cos,
    Exp,
    Ln,
    Atan,
}

impl Func {
    pub const ALL: [Func; 6] = [
        Func::Sqrt,
        Func::Sin,
        Func::Cos,
        Func::Exp,
        Func::Ln,
        Func::Atan,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sqrt => "sqrt",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Atan => "atan",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
        }
    }

    fn precedence(self) -> u8 {
        match self {
            BinOp::Add | BinOp::Sub => 1,
            BinOp::Mul | BinOp::Div => 2,
        }
    }
}

/// Expression tree over the variables `x1..xn` (stored zero-based).
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(usize),
    Neg(Box<Expr>),
    Func(Func, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    /// Power with a constant exponent `half_steps / 2`.
    Pow(Box<Expr>, i32),
}

impl Expr {
    pub fn var(one_based: usize) -> Expr {
        Expr::Var(one_based - 1)
    }

    pub fn binary(op: BinOp, l: Expr, r: Expr) -> Expr {
        Expr::Binary(op, Box::new(l), Box::new(r))
    }

    /// Largest variable index (one-based) that occurs, 0 for constants.
    pub fn max_var(&self) -> usize {
        match self {
            Expr::Const(_) => 0,
            Expr::Var(i) => i + 1,
            Expr::Neg(e) | Expr::Func(_, e) | Expr::Pow(e, _) => e.max_var(),
            Expr::Binary(_, l, r) => l.max_var().max(r.max_var()),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Expr::Const(c) if *c == 0.0)
    }

    pub fn eval<T: Scalar>(&self, x: &[T]) -> Result<T, EvalError> {
        match self {
            Expr::Const(c) => Ok(T::from_f64(*c)),
            Expr::Var(i) => x.get(*i).cloned().ok_or(EvalError::UnboundVariable {
                index: i + 1,
                arity: x.len(),
            }),
            Expr::Neg(e) => Ok(-e.eval(x)?),
            Expr::Func(f, e) => {
                let v = e.eval(x)?;
                let a = v.value();
                match f {
                    Func::Sqrt if a <= 0.0 && !(a == 0.0 && v.is_plain()) => {
                        return Err(self.domain(format!("sqrt of {a}")))
                    }
                    Func::Ln if a <= 0.0 => return Err(self.domain(format!("ln of {a}"))),
                    _ => {}
                }
                Ok(match f {
                    Func::Sqrt => v.sqrt(),
                    Func::Sin => v.sin(),
                    Func::Cos => v.cos(),
                    Func::Exp => v.exp(),
                    Func::Ln => v.ln(),
                    Func::Atan => v.atan(),
                })
            }
            Expr::Binary(op, l, r) => {
                let a = l.eval(x)?;
                let b = r.eval(x)?;
                Ok(match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => {
                        if b.value() == 0.0 {
                            return Err(self.domain("division by zero".into()));
                        }
                        a / b
                    }
                })
            }
            Expr::Pow(e, half) => {
                let v = e.eval(x)?;
                let a = v.value();
                if half % 2 == 0 {
                    let k = half / 2;
                    if k < 0 && a == 0.0 {
                        return Err(self.domain("negative power of zero".into()));
                    }
                    Ok(v.powi(k))
                } else {
                    if a < 0.0 || (a == 0.0 && (*half < 0 || !v.is_plain())) {
                        return Err(self.domain(format!("fractional power of {a}")));
                    }
                    Ok(v.powf(*half as f64 / 2.0))
                }
            }
        }
    }

    fn domain(&self, reason: String) -> EvalError {
        EvalError::Domain {
            node: self.to_string(),
            reason,
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Binary(op, ..) => op.precedence(),
            Expr::Neg(_) => 3,
            Expr::Pow(..) => 4,
            Expr::Const(c) if *c < 0.0 => 3,
            _ => 5,
        }
    }
}

fn format_number(c: f64) -> String {
    if c.fract() == 0.0 && c.abs() < 1e15 {
        format!("{}", c as i64)
    } else {
        format!("{c:e}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let wrap = |f: &mut fmt::Formatter<'_>, e: &Expr, min: u8| -> fmt::Result {
            if e.precedence() < min {
                write!(f, "({e})")
            } else {
                write!(f, "{e}")
            }
        };
        match self {
            Expr::Const(c) => f.write_str(&format_number(*c)),
            Expr::Var(i) => write!(f, "x{}", i + 1),
            Expr::Neg(e) => {
                f.write_str("-")?;
                wrap(f, e, 4)
            }
            Expr::Func(func, e) => write!(f, "{}({e})", func.name()),
            Expr::Binary(op, l, r) => {
                let p = op.precedence();
                wrap(f, l, p)?;
                write!(f, " {} ", op.symbol())?;
                wrap(f, r, p + 1)
            }
            Expr::Pow(e, half) => {
                wrap(f, e, 5)?;
                if half % 2 == 0 && *half >= 0 {
                    write!(f, "^{}", half / 2)
                } else if half % 2 == 0 {
                    write!(f, "^({})", half / 2)
                } else {
                    write!(f, "^({})", *half as f64 / 2.0)
                }
            }
        }
    }
}
