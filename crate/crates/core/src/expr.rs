//! Closed-form expressions over chart coordinates.
//!
//! Grammar (whitespace insignificant):
//!
//! ```text
//! expr   := term (("+"|"-") term)*
//! term   := factor (("*"|"/") factor)*
//! factor := ("-")? base ("^" integer)?
//! base   := number | ident | "(" expr ")" | func "(" expr ")"
//! func   := "sin" | "cos" | "tan" | "exp" | "log" | "sqrt"
//! ```
//!
//! `^` binds tighter than the unary minus, so `-x^2` is `-(x^2)`.

use std::fmt;
use std::sync::Arc;

use crate::error::{EvalError, ParseError};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
}

impl Func {
    fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
        }
    }
}

/// Expression tree. Subtrees are shared, so symbolic derivatives stay small.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(usize),
    Neg(Arc<Expr>),
    Add(Arc<Expr>, Arc<Expr>),
    Sub(Arc<Expr>, Arc<Expr>),
    Mul(Arc<Expr>, Arc<Expr>),
    Div(Arc<Expr>, Arc<Expr>),
    Pow(Arc<Expr>, u32),
    Call(Func, Arc<Expr>),
}

impl Expr {
    pub fn eval<T: Scalar>(&self, x: &[T]) -> Result<T, EvalError> {
        Ok(match self {
            Expr::Const(c) => T::from_f64(*c),
            Expr::Var(i) => x[*i],
            Expr::Neg(a) => -a.eval(x)?,
            Expr::Add(a, b) => a.eval(x)? + b.eval(x)?,
            Expr::Sub(a, b) => a.eval(x)? - b.eval(x)?,
            Expr::Mul(a, b) => a.eval(x)? * b.eval(x)?,
            Expr::Div(a, b) => {
                let den = b.eval(x)?;
                if den.re() == 0.0 {
                    return Err(EvalError::DivisionByZero);
                }
                a.eval(x)? / den
            }
            Expr::Pow(a, n) => a.eval(x)?.powi(*n as i32),
            Expr::Call(f, a) => {
                let v = a.eval(x)?;
                match f {
                    Func::Sin => v.sin(),
                    Func::Cos => v.cos(),
                    Func::Tan => v.tan(),
                    Func::Exp => v.exp(),
                    Func::Log => {
                        if v.re() <= 0.0 {
                            return Err(EvalError::Domain {
                                func: "log",
                                arg: v.re(),
                            });
                        }
                        v.ln()
                    }
                    Func::Sqrt => {
                        if v.re() < 0.0 {
                            return Err(EvalError::Domain {
                                func: "sqrt",
                                arg: v.re(),
                            });
                        }
                        v.sqrt()
                    }
                }
            }
        })
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Expr::Const(c) if *c == 0.0)
    }

    fn as_const(&self) -> Option<f64> {
        match self {
            Expr::Const(c) => Some(*c),
            _ => None,
        }
    }

    /// True when no coordinate occurs in the tree.
    pub fn is_constant(&self) -> bool {
        match self {
            Expr::Const(_) => true,
            Expr::Var(_) => false,
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Call(_, a) => a.is_constant(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.is_constant() && b.is_constant()
            }
        }
    }

    /// Symbolic partial derivative with respect to coordinate `i`.
    pub fn derivative(self: &Arc<Self>, i: usize) -> Arc<Expr> {
        match &**self {
            Expr::Const(_) => cst(0.0),
            Expr::Var(j) => cst(if *j == i { 1.0 } else { 0.0 }),
            Expr::Neg(a) => neg(a.derivative(i)),
            Expr::Add(a, b) => add(a.derivative(i), b.derivative(i)),
            Expr::Sub(a, b) => sub(a.derivative(i), b.derivative(i)),
            Expr::Mul(a, b) => add(
                mul(a.derivative(i), b.clone()),
                mul(a.clone(), b.derivative(i)),
            ),
            Expr::Div(a, b) => {
                let da = a.derivative(i);
                let db = b.derivative(i);
                if db.is_zero() {
                    return div(da, b.clone());
                }
                div(
                    sub(mul(da, b.clone()), mul(a.clone(), db)),
                    pow(b.clone(), 2),
                )
            }
            Expr::Pow(a, n) => match n {
                0 => cst(0.0),
                1 => a.derivative(i),
                _ => mul(mul(cst(*n as f64), pow(a.clone(), n - 1)), a.derivative(i)),
            },
            Expr::Call(f, a) => {
                let da = a.derivative(i);
                if da.is_zero() {
                    return cst(0.0);
                }
                let outer = match f {
                    Func::Sin => call(Func::Cos, a.clone()),
                    Func::Cos => neg(call(Func::Sin, a.clone())),
                    Func::Tan => add(cst(1.0), pow(call(Func::Tan, a.clone()), 2)),
                    Func::Exp => self.clone(),
                    Func::Log => div(cst(1.0), a.clone()),
                    Func::Sqrt => div(cst(0.5), self.clone()),
                };
                mul(outer, da)
            }
        }
    }

    /// Fully parenthesised rendering that reparses to an equivalent tree.
    pub fn display<'a>(&'a self, names: &'a [String]) -> ExprDisplay<'a> {
        ExprDisplay { expr: self, names }
    }
}

pub struct ExprDisplay<'a> {
    expr: &'a Expr,
    names: &'a [String],
}

impl<'a> fmt::Display for ExprDisplay<'a> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sub = |e: &'a Expr| ExprDisplay {
            expr: e,
            names: self.names,
        };
        match self.expr {
            Expr::Const(c) => {
                if *c < 0.0 || (*c == 0.0 && c.is_sign_negative()) {
                    write!(f, "(-{:?})", -c)
                } else {
                    write!(f, "{:?}", c)
                }
            }
            Expr::Var(i) => write!(f, "{}", self.names[*i]),
            Expr::Neg(a) => write!(f, "(-{})", sub(a)),
            Expr::Add(a, b) => write!(f, "({} + {})", sub(a), sub(b)),
            Expr::Sub(a, b) => write!(f, "({} - {})", sub(a), sub(b)),
            Expr::Mul(a, b) => write!(f, "({} * {})", sub(a), sub(b)),
            Expr::Div(a, b) => write!(f, "({} / {})", sub(a), sub(b)),
            Expr::Pow(a, n) => write!(f, "({}^{})", sub(a), n),
            Expr::Call(func, a) => write!(f, "{}({})", func.name(), sub(a)),
        }
    }
}

// Smart constructors with light constant folding.

pub fn cst(c: f64) -> Arc<Expr> {
    Arc::new(Expr::Const(c))
}

pub fn var(i: usize) -> Arc<Expr> {
    Arc::new(Expr::Var(i))
}

pub fn neg(a: Arc<Expr>) -> Arc<Expr> {
    match &*a {
        Expr::Const(c) => cst(-c),
        Expr::Neg(inner) => inner.clone(),
        _ => Arc::new(Expr::Neg(a)),
    }
}

pub fn add(a: Arc<Expr>, b: Arc<Expr>) -> Arc<Expr> {
    match (a.as_const(), b.as_const()) {
        (Some(x), Some(y)) => cst(x + y),
        (Some(0.0), _) => b,
        (_, Some(0.0)) => a,
        _ => Arc::new(Expr::Add(a, b)),
    }
}

pub fn sub(a: Arc<Expr>, b: Arc<Expr>) -> Arc<Expr> {
    match (a.as_const(), b.as_const()) {
        (Some(x), Some(y)) => cst(x - y),
        (Some(0.0), _) => neg(b),
        (_, Some(0.0)) => a,
        _ => Arc::new(Expr::Sub(a, b)),
    }
}

pub fn mul(a: Arc<Expr>, b: Arc<Expr>) -> Arc<Expr> {
    match (a.as_const(), b.as_const()) {
        (Some(x), Some(y)) => cst(x * y),
        (Some(0.0), _) | (_, Some(0.0)) => cst(0.0),
        (Some(1.0), _) => b,
        (_, Some(1.0)) => a,
        (Some(-1.0), _) => neg(b),
        (_, Some(-1.0)) => neg(a),
        _ => Arc::new(Expr::Mul(a, b)),
    }
}

pub fn div(a: Arc<Expr>, b: Arc<Expr>) -> Arc<Expr> {
    match (a.as_const(), b.as_const()) {
        (Some(0.0), _) => cst(0.0),
        (_, Some(1.0)) => a,
        _ => Arc::new(Expr::Div(a, b)),
    }
}

pub fn pow(a: Arc<Expr>, n: u32) -> Arc<Expr> {
    match (n, a.as_const()) {
        (0, _) => cst(1.0),
        (1, _) => a,
        (_, Some(c)) => cst(c.powi(n as i32)),
        _ => Arc::new(Expr::Pow(a, n)),
    }
}

pub fn call(f: Func, a: Arc<Expr>) -> Arc<Expr> {
    Arc::new(Expr::Call(f, a))
}

/// Sum of a list of terms.
pub fn sum(terms: impl IntoIterator<Item = Arc<Expr>>) -> Arc<Expr> {
    terms.into_iter().fold(cst(0.0), add)
}

// Parsing.

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Int(u32),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

fn tokenize(text: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'+' => out.push((start, Tok::Plus)),
            b'-' => out.push((start, Tok::Minus)),
            b'*' => out.push((start, Tok::Star)),
            b'/' => out.push((start, Tok::Slash)),
            b'^' => out.push((start, Tok::Caret)),
            b'(' => out.push((start, Tok::LParen)),
            b')' => out.push((start, Tok::RParen)),
            b'0'..=b'9' | b'.' => {
                let mut j = i;
                while j < bytes.len() && bytes[j].is_ascii_digit() {
                    j += 1;
                }
                let mut integral = true;
                if j < bytes.len() && bytes[j] == b'.' {
                    integral = false;
                    j += 1;
                    while j < bytes.len() && bytes[j].is_ascii_digit() {
                        j += 1;
                    }
                }
                if j < bytes.len() && (bytes[j] == b'e' || bytes[j] == b'E') {
                    let mut k = j + 1;
                    if k < bytes.len() && (bytes[k] == b'+' || bytes[k] == b'-') {
                        k += 1;
                    }
                    if k < bytes.len() && bytes[k].is_ascii_digit() {
                        integral = false;
                        while k < bytes.len() && bytes[k].is_ascii_digit() {
                            k += 1;
                        }
                        j = k;
                    }
                }
                let lit = &text[i..j];
                let value: f64 = lit.parse().map_err(|_| ParseError {
                    position: start,
                    message: format!("invalid number '{lit}'"),
                })?;
                let tok = match (integral, lit.parse::<u32>()) {
                    (true, Ok(n)) => Tok::Int(n),
                    _ => Tok::Num(value),
                };
                out.push((start, tok));
                i = j;
                continue;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                let mut j = i;
                while j < bytes.len() && (bytes[j].is_ascii_alphanumeric() || bytes[j] == b'_') {
                    j += 1;
                }
                out.push((start, Tok::Ident(text[i..j].to_string())));
                i = j;
                continue;
            }
            _ => {
                let ch = text[i..].chars().next().unwrap_or('?');
                return Err(ParseError {
                    position: start,
                    message: format!("unexpected character '{ch}'"),
                });
            }
        }
        i += 1;
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
    names: &'a [String],
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn here(&self) -> usize {
        self.toks.get(self.pos).map(|(p, _)| *p).unwrap_or(self.end)
    }

    fn error(&self, message: impl Into<String>) -> ParseError {
        ParseError {
            position: self.here(),
            message: message.into(),
        }
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), ParseError> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(format!("expected {what}")))
        }
    }

    fn expr(&mut self) -> Result<Arc<Expr>, ParseError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    lhs = Arc::new(Expr::Add(lhs, self.term()?));
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    lhs = Arc::new(Expr::Sub(lhs, self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Arc<Expr>, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.pos += 1;
                    lhs = Arc::new(Expr::Mul(lhs, self.factor()?));
                }
                Some(Tok::Slash) => {
                    self.pos += 1;
                    lhs = Arc::new(Expr::Div(lhs, self.factor()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn factor(&mut self) -> Result<Arc<Expr>, ParseError> {
        let negate = if self.peek() == Some(&Tok::Minus) {
            self.pos += 1;
            true
        } else {
            false
        };
        let mut base = self.base()?;
        if self.peek() == Some(&Tok::Caret) {
            self.pos += 1;
            match self.peek() {
                Some(Tok::Int(n)) => {
                    let n = *n;
                    self.pos += 1;
                    base = Arc::new(Expr::Pow(base, n));
                }
                _ => return Err(self.error("expected non-negative integer exponent")),
            }
        }
        Ok(if negate {
            Arc::new(Expr::Neg(base))
        } else {
            base
        })
    }

    fn base(&mut self) -> Result<Arc<Expr>, ParseError> {
        let at = self.here();
        match self.peek().cloned() {
            Some(Tok::Num(v)) => {
                self.pos += 1;
                Ok(cst(v))
            }
            Some(Tok::Int(n)) => {
                self.pos += 1;
                Ok(cst(n as f64))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(e)
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                if let Some(func) = Func::from_name(&name) {
                    self.expect(Tok::LParen, &format!("'(' after {name}"))?;
                    let arg = self.expr()?;
                    self.expect(Tok::RParen, "')'")?;
                    return Ok(call(func, arg));
                }
                match self.names.iter().position(|n| *n == name) {
                    Some(i) => Ok(var(i)),
                    None => Err(ParseError {
                        position: at,
                        message: format!("unknown identifier '{name}'"),
                    }),
                }
            }
            Some(_) => Err(self.error("unexpected token")),
            None => Err(self.error("unexpected end of input")),
        }
    }
}

/// Parse `text` against the declared coordinate names.
pub fn parse(text: &str, names: &[String]) -> Result<Arc<Expr>, ParseError> {
    let toks = tokenize(text)?;
    let mut p = Parser {
        toks,
        pos: 0,
        end: text.len(),
        names,
    };
    let e = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(e)
}
