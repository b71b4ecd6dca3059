//! Recursive-descent parser for component expressions.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := atom ('^' exponent)?
//! exponent:= ['-'] number | '(' ['-'] number ')'
//! atom    := number | 'x'index | 'pi' | func '(' expr ')' | '(' expr ')'
//! ```
//!
//! Offsets in errors are 1-based byte positions; an error at end of input
//! points one past the last byte.

use thiserror::Error;

use super::expr::{BinOp, Expr, Func};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("syntax error at offset {offset}: expected {}, found {found}", expected.join(" or "))]
    Syntax {
        offset: usize,
        expected: Vec<String>,
        found: String,
    },
    #[error("unknown identifier `{name}` at offset {offset}")]
    UnknownIdentifier { offset: usize, name: String },
    #[error("variable x{index} at offset {offset} is out of range (n = {n})")]
    VariableOutOfRange {
        offset: usize,
        index: usize,
        n: usize,
    },
    #[error("exponent {value} at offset {offset} must be an integer or half-integer")]
    BadExponent { offset: usize, value: f64 },
}

impl ParseError {
    pub fn offset(&self) -> usize {
        match self {
            ParseError::Syntax { offset, .. }
            | ParseError::UnknownIdentifier { offset, .. }
            | ParseError::VariableOutOfRange { offset, .. }
            | ParseError::BadExponent { offset, .. } => *offset,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Sym(char),
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(v) => format!("number {v}"),
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Sym(c) => format!("\"{c}\""),
            Tok::End => "end of input".into(),
        }
    }
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn tokens(text: &'a str) -> Result<Vec<(Tok, usize)>, ParseError> {
        let mut lx = Lexer {
            src: text.as_bytes(),
            pos: 0,
        };
        let mut out = Vec::new();
        loop {
            while lx.pos < lx.src.len() && lx.src[lx.pos].is_ascii_whitespace() {
                lx.pos += 1;
            }
            let start = lx.pos;
            if start >= lx.src.len() {
                out.push((Tok::End, start));
                return Ok(out);
            }
            let c = lx.src[start];
            if c.is_ascii_digit() || c == b'.' {
                out.push((lx.number()?, start));
            } else if c.is_ascii_alphabetic() || c == b'_' {
                while lx.pos < lx.src.len()
                    && (lx.src[lx.pos].is_ascii_alphanumeric() || lx.src[lx.pos] == b'_')
                {
                    lx.pos += 1;
                }
                let word = String::from_utf8_lossy(&lx.src[start..lx.pos]).into_owned();
                out.push((Tok::Ident(word), start));
            } else if b"+-*/^()".contains(&c) {
                lx.pos += 1;
                out.push((Tok::Sym(c as char), start));
            } else {
                let ch = text[start..].chars().next().unwrap_or('?');
                return Err(ParseError::Syntax {
                    offset: start + 1,
                    expected: vec!["expression".into()],
                    found: format!("\"{ch}\""),
                });
            }
        }
    }

    fn number(&mut self) -> Result<Tok, ParseError> {
        let start = self.pos;
        let digits = |lx: &mut Self| {
            while lx.pos < lx.src.len() && lx.src[lx.pos].is_ascii_digit() {
                lx.pos += 1;
            }
        };
        digits(self);
        if self.pos < self.src.len() && self.src[self.pos] == b'.' {
            self.pos += 1;
            digits(self);
        }
        if self.pos < self.src.len() && (self.src[self.pos] == b'e' || self.src[self.pos] == b'E') {
            let save = self.pos;
            self.pos += 1;
            if self.pos < self.src.len()
                && (self.src[self.pos] == b'+' || self.src[self.pos] == b'-')
            {
                self.pos += 1;
            }
            let before = self.pos;
            digits(self);
            if self.pos == before {
                self.pos = save;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("");
        text.parse::<f64>()
            .map(Tok::Num)
            .map_err(|_| ParseError::Syntax {
                offset: start + 1,
                expected: vec!["number".into()],
                found: format!("`{text}`"),
            })
    }
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    n: Option<usize>,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1 + 1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, expected: &[&str]) -> ParseError {
        ParseError::Syntax {
            offset: self.offset(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: self.peek().describe(),
        }
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        if *self.peek() == Tok::Sym(c) {
            self.bump();
            Ok(())
        } else {
            Err(self.error(&[&format!("\"{c}\"")]))
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Sym('+') => BinOp::Add,
                Tok::Sym('-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            lhs = Expr::binary(op, lhs, self.term()?);
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Sym('*') => BinOp::Mul,
                Tok::Sym('/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            lhs = Expr::binary(op, lhs, self.unary()?);
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if *self.peek() == Tok::Sym('-') {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if *self.peek() != Tok::Sym('^') {
            return Ok(base);
        }
        self.bump();
        let paren = *self.peek() == Tok::Sym('(');
        if paren {
            self.bump();
        }
        let negative = *self.peek() == Tok::Sym('-');
        if negative {
            self.bump();
        }
        let at = self.offset();
        let value = match self.peek() {
            Tok::Num(v) => *v,
            _ => return Err(self.error(&["number"])),
        };
        self.bump();
        if paren {
            self.expect(')')?;
        }
        let value = if negative { -value } else { value };
        let half = value * 2.0;
        if half.fract() != 0.0 || half.abs() > 1e6 {
            return Err(ParseError::BadExponent { offset: at, value });
        }
        Ok(Expr::Pow(Box::new(base), half as i32))
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let at = self.offset();
        match self.peek().clone() {
            Tok::Num(v) => {
                self.bump();
                Ok(Expr::Const(v))
            }
            Tok::Sym('(') => {
                self.bump();
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::Ident(name) => {
                self.bump();
                if name == "pi" {
                    return Ok(Expr::Const(std::f64::consts::PI));
                }
                if let Some(func) = Func::from_name(&name) {
                    self.expect('(')?;
                    let e = self.expr()?;
                    self.expect(')')?;
                    return Ok(Expr::Func(func, Box::new(e)));
                }
                if let Some(digits) = name.strip_prefix('x') {
                    if !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit()) {
                        let index: usize = digits.parse().unwrap_or(0);
                        let n = self.n.unwrap_or(usize::MAX);
                        if index == 0 || index > n {
                            return Err(ParseError::VariableOutOfRange {
                                offset: at,
                                index,
                                n: self.n.unwrap_or(0),
                            });
                        }
                        return Ok(Expr::Var(index - 1));
                    }
                }
                Err(ParseError::UnknownIdentifier { offset: at, name })
            }
            _ => Err(self.error(&["number", "variable", "function", "\"(\""])),
        }
    }
}

fn run(text: &str, n: Option<usize>) -> Result<Expr, ParseError> {
    let toks = Lexer::tokens(text)?;
    let mut p = Parser { toks, pos: 0, n };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(p.error(&["operator", "end of input"]));
    }
    Ok(e)
}

/// Parses an expression; any variable index ≥ 1 is accepted.
pub fn parse(text: &str) -> Result<Expr, ParseError> {
    run(text, None)
}

/// Parses an expression whose variables must lie in `x1..xn`.
pub fn parse_for(text: &str, n: usize) -> Result<Expr, ParseError> {
    run(text, Some(n))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builds_expected_tree() {
        let e = parse("x1^2 + sin(x2)").unwrap();
        assert_eq!(
            e,
            Expr::binary(
                BinOp::Add,
                Expr::Pow(Box::new(Expr::Var(0)), 4),
                Expr::Func(Func::Sin, Box::new(Expr::Var(1)))
            )
        );
    }

    #[test]
    fn funk_denominator() {
        let e = parse("1/(1 - x1^2 - x2^2)").unwrap();
        assert_eq!(e.eval(&[0.5, 0.5]).unwrap(), 2.0);
    }

    #[test]
    fn unbalanced_parenthesis() {
        match parse("x1 + (x2") {
            Err(ParseError::Syntax {
                offset, expected, ..
            }) => {
                assert_eq!(offset, 9);
                assert_eq!(expected, vec!["\")\"".to_string()]);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn precedence_and_association() {
        assert_eq!(parse("-x1^2").unwrap().eval(&[3.0]).unwrap(), -9.0);
        assert_eq!(parse("8/4/2").unwrap().eval::<f64>(&[]).unwrap(), 1.0);
        assert_eq!(parse("2-3-4").unwrap().eval::<f64>(&[]).unwrap(), -5.0);
        assert_eq!(parse("2*3+4*5").unwrap().eval::<f64>(&[]).unwrap(), 26.0);
        assert_eq!(parse("x1^(-1)").unwrap().eval(&[4.0]).unwrap(), 0.25);
        assert_eq!(parse("x1^1.5").unwrap().eval(&[4.0]).unwrap(), 8.0);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            parse("foo(x1)"),
            Err(ParseError::UnknownIdentifier { offset: 1, .. })
        ));
        assert!(matches!(
            parse_for("x4", 3),
            Err(ParseError::VariableOutOfRange { index: 4, n: 3, .. })
        ));
        assert!(matches!(
            parse("x1^0.3"),
            Err(ParseError::BadExponent { .. })
        ));
        assert!(matches!(parse("x1^x2"), Err(ParseError::Syntax { .. })));
        assert!(matches!(
            parse("x1 x2"),
            Err(ParseError::Syntax { offset: 4, .. })
        ));
        assert!(matches!(
            parse("x1 # 2"),
            Err(ParseError::Syntax { offset: 4, .. })
        ));
        assert!(parse("").is_err());
    }

    #[test]
    fn reparse_of_printed_tree_is_identical() {
        for text in [
            "x1 - (x2 - x3)",
            "-(x1 + 2)^3 / sqrt(1 - x1^2)",
            "exp(-x1*x2) * atan(x3)^(-0.5) + 1.25e-3",
            "(2 - x1)^(1.5) - -x2",
        ] {
            let a = parse(text).unwrap();
            let b = parse(&a.to_string()).unwrap();
            assert_eq!(a, b, "{text} -> {a}");
        }
    }
}
