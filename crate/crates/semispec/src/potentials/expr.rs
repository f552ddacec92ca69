//! Potential expression language: arithmetic over `x`, `y` with integer
//! exponents, exact symbolic differentiation, and constant folding.
//!
//! Grammar (precedence high to low): `^` (integer exponent), unary `-`,
//! `* /`, binary `+ -`; binary operators are left-associative. Division is
//! restricted to nonzero constant denominators so differentiation stays
//! closed and evaluation total.

use crate::error::{Error, Result};
use crate::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

impl Axis {
    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr<F> {
    Num(F),
    Var(Axis),
    Add(Box<Expr<F>>, Box<Expr<F>>),
    Sub(Box<Expr<F>>, Box<Expr<F>>),
    Mul(Box<Expr<F>>, Box<Expr<F>>),
    /// Denominator is guaranteed a nonzero constant at build time.
    Div(Box<Expr<F>>, F),
    Pow(Box<Expr<F>>, i32),
    Neg(Box<Expr<F>>),
}

/// A parsed potential expression together with the dimension it was parsed
/// for. Immutable; differentiation returns a new expression.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialExpr<F> {
    pub ast: Expr<F>,
    pub dim: usize,
}

impl<F: Real> PotentialExpr<F> {
    pub fn parse(text: &str, dim: usize) -> Result<Self> {
        assert!(dim == 1 || dim == 2, "dim must be 1 or 2");
        if text.trim().is_empty() {
            return Err(Error::Parse {
                offset: 0,
                msg: "empty expression".into(),
            });
        }
        let tokens = tokenize::<F>(text)?;
        let mut p = Parser {
            tokens,
            pos: 0,
            dim,
            end: text.len(),
        };
        let ast = p.expr(0)?;
        if let Some(t) = p.peek() {
            return Err(Error::Parse {
                offset: t.offset,
                msg: format!("unexpected trailing `{}`", t.kind.describe()),
            });
        }
        Ok(Self {
            ast: simplify(ast),
            dim,
        })
    }

    pub fn constant(v: F, dim: usize) -> Self {
        Self {
            ast: Expr::Num(v),
            dim,
        }
    }

    pub fn eval(&self, p: [F; 2]) -> F {
        eval(&self.ast, p)
    }

    /// Exact symbolic derivative, algebraically simplified.
    pub fn differentiate(&self, var: Axis) -> Result<Self> {
        if self.dim == 1 && var == Axis::Y {
            return Err(Error::Precondition(
                "cannot differentiate a 1D expression in y".into(),
            ));
        }
        Ok(Self {
            ast: simplify(diff(&self.ast, var)),
            dim: self.dim,
        })
    }

    pub fn const_value(&self) -> Option<F> {
        match self.ast {
            Expr::Num(v) => Some(v),
            _ => None,
        }
    }
}

impl<F: Real> std::fmt::Display for PotentialExpr<F> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        fmt_expr(&self.ast, f)
    }
}

fn fmt_expr<F: Real>(e: &Expr<F>, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
    match e {
        Expr::Num(v) => write!(f, "{v}"),
        Expr::Var(Axis::X) => write!(f, "x"),
        Expr::Var(Axis::Y) => write!(f, "y"),
        Expr::Add(a, b) => {
            write!(f, "(")?;
            fmt_expr(a, f)?;
            write!(f, " + ")?;
            fmt_expr(b, f)?;
            write!(f, ")")
        }
        Expr::Sub(a, b) => {
            write!(f, "(")?;
            fmt_expr(a, f)?;
            write!(f, " - ")?;
            fmt_expr(b, f)?;
            write!(f, ")")
        }
        Expr::Mul(a, b) => {
            write!(f, "(")?;
            fmt_expr(a, f)?;
            write!(f, "*")?;
            fmt_expr(b, f)?;
            write!(f, ")")
        }
        Expr::Div(a, c) => {
            write!(f, "(")?;
            fmt_expr(a, f)?;
            write!(f, "/{c})")
        }
        Expr::Pow(a, k) => {
            fmt_expr(a, f)?;
            write!(f, "^{k}")
        }
        Expr::Neg(a) => {
            write!(f, "-(")?;
            fmt_expr(a, f)?;
            write!(f, ")")
        }
    }
}

pub fn eval<F: Real>(e: &Expr<F>, p: [F; 2]) -> F {
    match e {
        Expr::Num(v) => *v,
        Expr::Var(a) => p[a.index()],
        Expr::Add(a, b) => eval(a, p) + eval(b, p),
        Expr::Sub(a, b) => eval(a, p) - eval(b, p),
        Expr::Mul(a, b) => eval(a, p) * eval(b, p),
        Expr::Div(a, c) => eval(a, p) / *c,
        Expr::Pow(a, k) => eval(a, p).powi(*k),
        Expr::Neg(a) => -eval(a, p),
    }
}

fn diff<F: Real>(e: &Expr<F>, var: Axis) -> Expr<F> {
    match e {
        Expr::Num(_) => Expr::Num(F::zero()),
        Expr::Var(a) => {
            if *a == var {
                Expr::Num(F::one())
            } else {
                Expr::Num(F::zero())
            }
        }
        Expr::Add(a, b) => Expr::Add(Box::new(diff(a, var)), Box::new(diff(b, var))),
        Expr::Sub(a, b) => Expr::Sub(Box::new(diff(a, var)), Box::new(diff(b, var))),
        Expr::Mul(a, b) => Expr::Add(
            Box::new(Expr::Mul(Box::new(diff(a, var)), b.clone())),
            Box::new(Expr::Mul(a.clone(), Box::new(diff(b, var)))),
        ),
        Expr::Div(a, c) => Expr::Div(Box::new(diff(a, var)), *c),
        Expr::Pow(a, k) => {
            // d(a^k) = k a^(k-1) a'
            Expr::Mul(
                Box::new(Expr::Mul(
                    Box::new(Expr::Num(F::from_f64_(*k as f64))),
                    Box::new(Expr::Pow(a.clone(), k - 1)),
                )),
                Box::new(diff(a, var)),
            )
        }
        Expr::Neg(a) => Expr::Neg(Box::new(diff(a, var))),
    }
}

/// Constant folding plus the identity rules 0*e, 1*e, e+0, e-0, e^0, e^1.
pub fn simplify<F: Real>(e: Expr<F>) -> Expr<F> {
    let zero = F::zero();
    let one = F::one();
    match e {
        Expr::Num(_) | Expr::Var(_) => e,
        Expr::Add(a, b) => {
            let (a, b) = (simplify(*a), simplify(*b));
            match (&a, &b) {
                (Expr::Num(x), Expr::Num(y)) => Expr::Num(*x + *y),
                (Expr::Num(x), _) if *x == zero => b,
                (_, Expr::Num(y)) if *y == zero => a,
                _ => Expr::Add(Box::new(a), Box::new(b)),
            }
        }
        Expr::Sub(a, b) => {
            let (a, b) = (simplify(*a), simplify(*b));
            match (&a, &b) {
                (Expr::Num(x), Expr::Num(y)) => Expr::Num(*x - *y),
                (_, Expr::Num(y)) if *y == zero => a,
                (Expr::Num(x), _) if *x == zero => Expr::Neg(Box::new(b)),
                _ => Expr::Sub(Box::new(a), Box::new(b)),
            }
        }
        Expr::Mul(a, b) => {
            let (a, b) = (simplify(*a), simplify(*b));
            match (&a, &b) {
                (Expr::Num(x), Expr::Num(y)) => Expr::Num(*x * *y),
                (Expr::Num(x), _) if *x == zero => Expr::Num(zero),
                (_, Expr::Num(y)) if *y == zero => Expr::Num(zero),
                (Expr::Num(x), _) if *x == one => b,
                (_, Expr::Num(y)) if *y == one => a,
                _ => Expr::Mul(Box::new(a), Box::new(b)),
            }
        }
        Expr::Div(a, c) => {
            let a = simplify(*a);
            match &a {
                Expr::Num(x) => Expr::Num(*x / c),
                _ if c == one => a,
                _ => Expr::Div(Box::new(a), c),
            }
        }
        Expr::Pow(a, k) => {
            let a = simplify(*a);
            match (&a, k) {
                (_, 0) => Expr::Num(one),
                (_, 1) => a,
                (Expr::Num(x), _) => Expr::Num(x.powi(k)),
                _ => Expr::Pow(Box::new(a), k),
            }
        }
        Expr::Neg(a) => {
            let a = simplify(*a);
            match a {
                Expr::Num(x) => Expr::Num(-x),
                Expr::Neg(inner) => *inner,
                _ => Expr::Neg(Box::new(a)),
            }
        }
    }
}

fn const_eval<F: Real>(e: &Expr<F>) -> Option<F> {
    match e {
        Expr::Num(v) => Some(*v),
        Expr::Var(_) => None,
        Expr::Add(a, b) => Some(const_eval(a)? + const_eval(b)?),
        Expr::Sub(a, b) => Some(const_eval(a)? - const_eval(b)?),
        Expr::Mul(a, b) => Some(const_eval(a)? * const_eval(b)?),
        Expr::Div(a, c) => Some(const_eval(a)? / *c),
        Expr::Pow(a, k) => Some(const_eval(a)?.powi(*k)),
        Expr::Neg(a) => Some(-const_eval(a)?),
    }
}

// ---------------------------------------------------------------------------
// tokenizer / parser

#[derive(Debug, Clone, PartialEq)]
enum TokKind<F> {
    Num(F),
    VarX,
    VarY,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

impl<F> TokKind<F> {
    fn describe(&self) -> &'static str {
        match self {
            TokKind::Num(_) => "number",
            TokKind::VarX => "x",
            TokKind::VarY => "y",
            TokKind::Plus => "+",
            TokKind::Minus => "-",
            TokKind::Star => "*",
            TokKind::Slash => "/",
            TokKind::Caret => "^",
            TokKind::LParen => "(",
            TokKind::RParen => ")",
        }
    }
}

#[derive(Debug, Clone)]
struct Token<F> {
    kind: TokKind<F>,
    offset: usize,
    /// integer value when the literal is integral (needed for exponents)
    int_value: Option<i64>,
}

fn tokenize<F: Real>(text: &str) -> Result<Vec<Token<F>>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        let offset = i;
        match c {
            ' ' | '\t' | '\n' | '\r' => {
                i += 1;
                continue;
            }
            '+' => push_op(&mut out, TokKind::Plus, offset, &mut i),
            '-' => push_op(&mut out, TokKind::Minus, offset, &mut i),
            '*' => push_op(&mut out, TokKind::Star, offset, &mut i),
            '/' => push_op(&mut out, TokKind::Slash, offset, &mut i),
            '^' => push_op(&mut out, TokKind::Caret, offset, &mut i),
            '(' => push_op(&mut out, TokKind::LParen, offset, &mut i),
            ')' => push_op(&mut out, TokKind::RParen, offset, &mut i),
            'x' => push_op(&mut out, TokKind::VarX, offset, &mut i),
            'y' => push_op(&mut out, TokKind::VarY, offset, &mut i),
            c if c.is_ascii_digit() || c == '.' => {
                let start = i;
                let mut integral = true;
                while i < bytes.len() && (bytes[i] as char).is_ascii_digit() {
                    i += 1;
                }
                if i < bytes.len() && bytes[i] == b'.' {
                    integral = false;
                    i += 1;
                    while i < bytes.len() && (bytes[i] as char).is_ascii_digit() {
                        i += 1;
                    }
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    integral = false;
                    i += 1;
                    if i < bytes.len() && (bytes[i] == b'+' || bytes[i] == b'-') {
                        i += 1;
                    }
                    while i < bytes.len() && (bytes[i] as char).is_ascii_digit() {
                        i += 1;
                    }
                }
                let lit = &text[start..i];
                let v: f64 = lit.parse().map_err(|_| Error::Parse {
                    offset: start,
                    msg: format!("invalid numeric literal `{lit}`"),
                })?;
                let int_value = if integral { lit.parse::<i64>().ok() } else { None };
                out.push(Token {
                    kind: TokKind::Num(F::from_f64_(v)),
                    offset: start,
                    int_value,
                });
            }
            other => {
                return Err(Error::Parse {
                    offset,
                    msg: format!("unexpected character `{other}`"),
                })
            }
        }
    }
    Ok(out)
}

fn push_op<F>(out: &mut Vec<Token<F>>, kind: TokKind<F>, offset: usize, i: &mut usize) {
    out.push(Token {
        kind,
        offset,
        int_value: None,
    });
    *i += 1;
}

struct Parser<F> {
    tokens: Vec<Token<F>>,
    pos: usize,
    dim: usize,
    end: usize,
}

impl<F: Real> Parser<F> {
    fn peek(&self) -> Option<&Token<F>> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Token<F>> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }


    /// Pratt loop over the binary operators `+ - * /`.
    fn expr(&mut self, min_bp: u8) -> Result<Expr<F>> {
        let mut lhs = self.unary()?;
        while let Some(tok) = self.peek() {
            let (bp, kind) = match tok.kind {
                TokKind::Plus => (1, 0u8),
                TokKind::Minus => (1, 1),
                TokKind::Star => (3, 2),
                TokKind::Slash => (3, 3),
                _ => break,
            };
            if bp < min_bp {
                break;
            }
            let op_offset = tok.offset;
            self.next();
            let rhs = self.expr(bp + 1)?;
            lhs = match kind {
                0 => Expr::Add(Box::new(lhs), Box::new(rhs)),
                1 => Expr::Sub(Box::new(lhs), Box::new(rhs)),
                2 => Expr::Mul(Box::new(lhs), Box::new(rhs)),
                _ => {
                    let denom = const_eval(&rhs).ok_or(Error::Parse {
                        offset: op_offset,
                        msg: "division by a non-constant expression".into(),
                    })?;
                    if denom == F::zero() {
                        return Err(Error::Parse {
                            offset: op_offset,
                            msg: "division by zero".into(),
                        });
                    }
                    Expr::Div(Box::new(lhs), denom)
                }
            };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr<F>> {
        if let Some(tok) = self.peek() {
            if tok.kind == TokKind::Minus {
                self.next();
                let inner = self.unary()?;
                return Ok(Expr::Neg(Box::new(inner)));
            }
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr<F>> {
        let mut base = self.atom()?;
        while let Some(tok) = self.peek() {
            if tok.kind != TokKind::Caret {
                break;
            }
            self.next();
            // exponent: optional sign followed by an integer literal
            let mut sign = 1i64;
            if let Some(t) = self.peek() {
                if t.kind == TokKind::Minus {
                    sign = -1;
                    self.next();
                }
            }
            let t = self
                .next()
                .ok_or_else(|| self.err_at_end("expected integer exponent"))?;
            match t.kind {
                TokKind::Num(_) => {
                    let k = t.int_value.ok_or(Error::Parse {
                        offset: t.offset,
                        msg: "non-integer exponent".into(),
                    })?;
                    base = Expr::Pow(Box::new(base), (sign * k) as i32);
                }
                _ => {
                    return Err(Error::Parse {
                        offset: t.offset,
                        msg: "expected integer exponent".into(),
                    })
                }
            }
        }
        Ok(base)
    }

    fn err_at_end(&self, msg: &str) -> Error {
        Error::Parse {
            offset: self.end,
            msg: msg.into(),
        }
    }

    fn atom(&mut self) -> Result<Expr<F>> {
        let t = match self.next() {
            Some(t) => t,
            None => return Err(self.err_at_end("incomplete expression")),
        };
        match t.kind {
            TokKind::Num(v) => Ok(Expr::Num(v)),
            TokKind::VarX => Ok(Expr::Var(Axis::X)),
            TokKind::VarY => {
                if self.dim == 1 {
                    Err(Error::Parse {
                        offset: t.offset,
                        msg: "variable y is not allowed in a 1D potential".into(),
                    })
                } else {
                    Ok(Expr::Var(Axis::Y))
                }
            }
            TokKind::LParen => {
                let inner = self.expr(0)?;
                match self.next() {
                    Some(tok) if tok.kind == TokKind::RParen => Ok(inner),
                    Some(tok) => Err(Error::Parse {
                        offset: tok.offset,
                        msg: "expected `)`".into(),
                    }),
                    None => Err(self.err_at_end("unclosed parenthesis")),
                }
            }
            other => Err(Error::Parse {
                offset: t.offset,
                msg: format!("unexpected `{}`", other.describe()),
            }),
        }
    }
}
