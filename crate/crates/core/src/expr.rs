//! Closed-form expression language for metric components and scalar fields.
//!
//! Grammar: standard infix with precedence `^` > unary `-` > `* /` > `+ -`,
//! left-associative except `^` (right-associative, as usual), parentheses,
//! and calls to `exp log sqrt sin cos abs`.  Identifiers that are not
//! function names are coordinates, resolved at evaluation time against the
//! chart's coordinate list.

use std::fmt;

use crate::error::{Error, Result};
use crate::jets::Jet;

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(String),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Call(String, Box<Expr>),
}

const FUNCTIONS: &[&str] = &["exp", "log", "sqrt", "sin", "cos", "abs"];

// ---------------------------------------------------------------------------
// Lexer

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Eof,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer {
            src: src.as_bytes(),
            pos: 0,
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    /// Returns the token and its starting byte offset.
    fn next(&mut self) -> Result<(Tok, usize)> {
        self.skip_ws();
        let start = self.pos;
        if self.pos >= self.src.len() {
            return Ok((Tok::Eof, start));
        }
        let c = self.src[self.pos];
        let tok = match c {
            b'+' => {
                self.pos += 1;
                Tok::Plus
            }
            b'-' => {
                self.pos += 1;
                Tok::Minus
            }
            b'*' => {
                self.pos += 1;
                Tok::Star
            }
            b'/' => {
                self.pos += 1;
                Tok::Slash
            }
            b'^' => {
                self.pos += 1;
                Tok::Caret
            }
            b'(' => {
                self.pos += 1;
                Tok::LParen
            }
            b')' => {
                self.pos += 1;
                Tok::RParen
            }
            b'0'..=b'9' | b'.' => {
                let mut end = self.pos;
                while end < self.src.len()
                    && (self.src[end].is_ascii_digit() || self.src[end] == b'.')
                {
                    end += 1;
                }
                // optional exponent
                if end < self.src.len() && (self.src[end] == b'e' || self.src[end] == b'E') {
                    let mut e = end + 1;
                    if e < self.src.len() && (self.src[e] == b'+' || self.src[e] == b'-') {
                        e += 1;
                    }
                    if e < self.src.len() && self.src[e].is_ascii_digit() {
                        while e < self.src.len() && self.src[e].is_ascii_digit() {
                            e += 1;
                        }
                        end = e;
                    }
                }
                let text = std::str::from_utf8(&self.src[self.pos..end]).unwrap();
                let v: f64 = text.parse().map_err(|_| Error::Parse {
                    offset: start,
                    message: format!("invalid number `{text}`"),
                })?;
                self.pos = end;
                Tok::Num(v)
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                let mut end = self.pos;
                while end < self.src.len()
                    && (self.src[end].is_ascii_alphanumeric() || self.src[end] == b'_')
                {
                    end += 1;
                }
                let name = std::str::from_utf8(&self.src[self.pos..end])
                    .unwrap()
                    .to_string();
                self.pos = end;
                Tok::Ident(name)
            }
            other => {
                return Err(Error::Parse {
                    offset: start,
                    message: format!("unexpected character `{}`", other as char),
                })
            }
        };
        Ok((tok, start))
    }
}

// ---------------------------------------------------------------------------
// Parser (recursive descent)

struct Parser<'a> {
    lexer: Lexer<'a>,
    cur: (Tok, usize),
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Result<Self> {
        let mut lexer = Lexer::new(src);
        let cur = lexer.next()?;
        Ok(Parser { lexer, cur })
    }

    fn advance(&mut self) -> Result<()> {
        self.cur = self.lexer.next()?;
        Ok(())
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            match self.cur.0 {
                Tok::Plus => {
                    self.advance()?;
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Tok::Minus => {
                    self.advance()?;
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            match self.cur.0 {
                Tok::Star => {
                    self.advance()?;
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                Tok::Slash => {
                    self.advance()?;
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.cur.0 == Tok::Minus {
            self.advance()?;
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.cur.0 == Tok::Caret {
            self.advance()?;
            // right-associative; exponent may be negated: x^-2
            let exp = if self.cur.0 == Tok::Minus {
                self.advance()?;
                Expr::Neg(Box::new(self.power()?))
            } else {
                self.power()?
            };
            return Ok(Expr::Pow(Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        let (tok, offset) = self.cur.clone();
        match tok {
            Tok::Num(v) => {
                self.advance()?;
                Ok(Expr::Num(v))
            }
            Tok::Ident(name) => {
                self.advance()?;
                if FUNCTIONS.contains(&name.as_str()) {
                    if self.cur.0 != Tok::LParen {
                        return Err(Error::Parse {
                            offset: self.cur.1,
                            message: format!("expected `(` after function `{name}`"),
                        });
                    }
                    self.advance()?;
                    let arg = self.expr()?;
                    if self.cur.0 != Tok::RParen {
                        return Err(Error::Parse {
                            offset: self.cur.1,
                            message: "expected `)`".into(),
                        });
                    }
                    self.advance()?;
                    Ok(Expr::Call(name, Box::new(arg)))
                } else {
                    Ok(Expr::Var(name))
                }
            }
            Tok::LParen => {
                self.advance()?;
                let inner = self.expr()?;
                if self.cur.0 != Tok::RParen {
                    return Err(Error::Parse {
                        offset: self.cur.1,
                        message: "expected `)`".into(),
                    });
                }
                self.advance()?;
                Ok(inner)
            }
            _ => Err(Error::Parse {
                offset,
                message: format!("unexpected token {tok:?}"),
            }),
        }
    }
}

/// Parse an infix expression.  Syntax errors carry the byte offset.
pub fn parse(source: &str) -> Result<Expr> {
    let mut p = Parser::new(source)?;
    let e = p.expr()?;
    if p.cur.0 != Tok::Eof {
        return Err(Error::Parse {
            offset: p.cur.1,
            message: format!("trailing input starting with {:?}", p.cur.0),
        });
    }
    Ok(e)
}

// ---------------------------------------------------------------------------
// Printing (parse(print(e)) evaluates identically to e)

impl Expr {
    fn prec(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Neg(..) => 3,
            Expr::Pow(..) => 4,
            Expr::Num(_) | Expr::Var(_) | Expr::Call(..) => 5,
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        let p = self.prec();
        if p < min {
            write!(f, "(")?;
        }
        match self {
            Expr::Num(v) => {
                if *v < 0.0 {
                    write!(f, "({v})")?;
                } else {
                    write!(f, "{v}")?;
                }
            }
            Expr::Var(n) => write!(f, "{n}")?,
            Expr::Neg(a) => {
                write!(f, "-")?;
                a.fmt_prec(f, 3)?;
            }
            Expr::Add(a, b) => {
                a.fmt_prec(f, 1)?;
                write!(f, " + ")?;
                b.fmt_prec(f, 2)?;
            }
            Expr::Sub(a, b) => {
                a.fmt_prec(f, 1)?;
                write!(f, " - ")?;
                b.fmt_prec(f, 2)?;
            }
            Expr::Mul(a, b) => {
                a.fmt_prec(f, 2)?;
                write!(f, "*")?;
                b.fmt_prec(f, 3)?;
            }
            Expr::Div(a, b) => {
                a.fmt_prec(f, 2)?;
                write!(f, "/")?;
                b.fmt_prec(f, 5)?;
            }
            Expr::Pow(a, b) => {
                a.fmt_prec(f, 5)?;
                write!(f, "^")?;
                b.fmt_prec(f, 4)?;
            }
            Expr::Call(n, a) => {
                write!(f, "{n}(")?;
                a.fmt_prec(f, 0)?;
                write!(f, ")")?;
            }
        }
        if p < min {
            write!(f, ")")?;
        }
        Ok(())
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

// ---------------------------------------------------------------------------
// Evaluation

impl Expr {
    /// Free variables, in first-appearance order.
    pub fn free_vars(&self) -> Vec<String> {
        let mut out = Vec::new();
        fn walk(e: &Expr, out: &mut Vec<String>) {
            match e {
                Expr::Num(_) => {}
                Expr::Var(n) => {
                    if !out.contains(n) {
                        out.push(n.clone());
                    }
                }
                Expr::Neg(a) | Expr::Call(_, a) => walk(a, out),
                Expr::Add(a, b)
                | Expr::Sub(a, b)
                | Expr::Mul(a, b)
                | Expr::Div(a, b)
                | Expr::Pow(a, b) => {
                    walk(a, out);
                    walk(b, out);
                }
            }
        }
        walk(self, &mut out);
        out
    }

    /// Constant value if the expression contains no variables.
    fn const_value(&self) -> Option<f64> {
        match self {
            Expr::Num(v) => Some(*v),
            Expr::Var(_) => None,
            Expr::Neg(a) => a.const_value().map(|v| -v),
            Expr::Add(a, b) => Some(a.const_value()? + b.const_value()?),
            Expr::Sub(a, b) => Some(a.const_value()? - b.const_value()?),
            Expr::Mul(a, b) => Some(a.const_value()? * b.const_value()?),
            Expr::Div(a, b) => Some(a.const_value()? / b.const_value()?),
            Expr::Pow(a, b) => Some(a.const_value()?.powf(b.const_value()?)),
            Expr::Call(n, a) => {
                let v = a.const_value()?;
                Some(match n.as_str() {
                    "exp" => v.exp(),
                    "log" => v.ln(),
                    "sqrt" => v.sqrt(),
                    "sin" => v.sin(),
                    "cos" => v.cos(),
                    "abs" => v.abs(),
                    _ => return None,
                })
            }
        }
    }

    /// Truncated Taylor expansion at `point`, with variables resolved
    /// against `coords`.  Exact to round-off for the supported functions.
    pub fn eval_jet(&self, point: &[f64], order: usize, coords: &[String]) -> Result<Jet> {
        assert_eq!(point.len(), coords.len());
        let n = coords.len();
        match self {
            Expr::Num(v) => Ok(Jet::constant(*v, n, order)),
            Expr::Var(name) => {
                let v = coords
                    .iter()
                    .position(|c| c == name)
                    .ok_or_else(|| Error::UnknownIdentifier { name: name.clone() })?;
                Ok(Jet::variable(v, point[v], n, order))
            }
            Expr::Neg(a) => Ok(a.eval_jet(point, order, coords)?.neg()),
            Expr::Add(a, b) => Ok(a
                .eval_jet(point, order, coords)?
                .add(&b.eval_jet(point, order, coords)?)),
            Expr::Sub(a, b) => Ok(a
                .eval_jet(point, order, coords)?
                .sub(&b.eval_jet(point, order, coords)?)),
            Expr::Mul(a, b) => Ok(a
                .eval_jet(point, order, coords)?
                .mul(&b.eval_jet(point, order, coords)?)),
            Expr::Div(a, b) => a
                .eval_jet(point, order, coords)?
                .div(&b.eval_jet(point, order, coords)?),
            Expr::Pow(a, b) => {
                let base = a.eval_jet(point, order, coords)?;
                match b.const_value() {
                    Some(p) if p == p.round() && p.abs() < 1e15 => base.powi(p as i64),
                    Some(p) => base.powf(p),
                    None => {
                        // general b: exp(b * log a)
                        let e = b.eval_jet(point, order, coords)?;
                        base.compose_elementary("log")?
                            .mul(&e)
                            .compose_elementary("exp")
                    }
                }
            }
            Expr::Call(name, a) => a
                .eval_jet(point, order, coords)?
                .compose_elementary(name),
        }
    }

    /// Plain point evaluation (order-0 jet).
    pub fn eval(&self, point: &[f64], coords: &[String]) -> Result<f64> {
        Ok(self.eval_jet(point, 0, coords)?.value())
    }
}

/// Convenience: owned coordinate name list from str slices.
pub fn coord_names(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(v: &[&str]) -> Vec<String> {
        coord_names(v)
    }

    #[test]
    fn ast_shape() {
        let e = parse("x1*x4 + x2*x3").unwrap();
        match e {
            Expr::Add(a, b) => {
                assert!(matches!(*a, Expr::Mul(..)));
                assert!(matches!(*b, Expr::Mul(..)));
            }
            _ => panic!("expected sum of products"),
        }
    }

    #[test]
    fn pow_and_exp_nodes() {
        let e = parse("r^2 * exp(2*s)").unwrap();
        match e {
            Expr::Mul(a, b) => {
                assert!(matches!(*a, Expr::Pow(..)));
                assert!(matches!(*b, Expr::Call(ref n, _) if n == "exp"));
            }
            _ => panic!("expected product"),
        }
    }

    #[test]
    fn unbalanced_paren_offset() {
        match parse("1/(x1") {
            Err(Error::Parse { offset, .. }) => assert_eq!(offset, 5),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn product_jet() {
        let e = parse("x1*x2").unwrap();
        let j = e.eval_jet(&[2.0, 3.0], 1, &names(&["x1", "x2"])).unwrap();
        assert_eq!(j.value(), 6.0);
        assert_eq!(j.gradient(), vec![3.0, 2.0]);
    }

    #[test]
    fn chain_rule_jet() {
        let e = parse("exp(2*s)").unwrap();
        let j = e.eval_jet(&[0.0], 2, &names(&["s"])).unwrap();
        assert_eq!(j.value(), 1.0);
        assert_eq!(j.partial(&[1]).unwrap(), 2.0);
        assert_eq!(j.partial(&[2]).unwrap(), 4.0);
    }

    #[test]
    fn log_domain_error() {
        let e = parse("log(x1)").unwrap();
        assert!(matches!(
            e.eval_jet(&[0.0], 1, &names(&["x1"])),
            Err(Error::DomainError { .. })
        ));
    }

    #[test]
    fn unknown_identifier_at_eval() {
        let e = parse("q + 1").unwrap();
        assert!(matches!(
            e.eval(&[1.0], &names(&["x1"])),
            Err(Error::UnknownIdentifier { .. })
        ));
    }

    #[test]
    fn precedence() {
        let e = parse("2 + 3 * 4 ^ 2").unwrap();
        assert_eq!(e.eval(&[], &[]).unwrap(), 50.0);
        let e = parse("-2^2").unwrap();
        assert_eq!(e.eval(&[], &[]).unwrap(), -4.0);
        let e = parse("2^-2").unwrap();
        assert_eq!(e.eval(&[], &[]).unwrap(), 0.25);
        let e = parse("10 - 4 - 3").unwrap();
        assert_eq!(e.eval(&[], &[]).unwrap(), 3.0);
        let e = parse("16 / 4 / 2").unwrap();
        assert_eq!(e.eval(&[], &[]).unwrap(), 2.0);
    }

    #[test]
    fn negative_base_integer_pow() {
        let e = parse("x1^3").unwrap();
        assert_eq!(e.eval(&[-2.0], &names(&["x1"])).unwrap(), -8.0);
        let e = parse("x1^0.5").unwrap();
        assert!(e.eval(&[-2.0], &names(&["x1"])).is_err());
    }

    #[test]
    fn print_parse_round_trip() {
        let cases = [
            "x1*x4 + x2*x3",
            "r^2 * exp(2*s)",
            "-(x1 + x2)*x3",
            "1/(1 - x1*x1 - x2*x2)^2",
            "x1 - (x2 - x3)",
            "x1/(x2*x3)",
            "(x1 + x2)^2",
            "-x1^2",
            "abs(x3*x4)",
            "2^3^2",
        ];
        let cs = names(&["x1", "x2", "x3", "x4", "r", "s"]);
        let pt = [0.3, -0.2, 0.7, 1.4, 1.1, 0.4];
        for src in cases {
            let e = parse(src).unwrap();
            let printed = e.to_string();
            let e2 = parse(&printed).unwrap_or_else(|err| panic!("reparse `{printed}`: {err}"));
            let a = e.eval_jet(&pt, 2, &cs).unwrap();
            let b = e2.eval_jet(&pt, 2, &cs).unwrap();
            for (x, y) in a.coeffs.iter().zip(&b.coeffs) {
                assert!((x - y).abs() < 1e-12, "`{src}` -> `{printed}`: {x} vs {y}");
            }
        }
    }
}
