//! A small language of smooth real functions of `(h, y1, ..., yn)`.
//!
//! Grammar (precedence `^` > unary `-` > `* /` > `+ -`):
//!
//! ```text
//! expr     := term (("+" | "-") term)*
//! term     := unary (("*" | "/") unary)*
//! unary    := "-" unary | power
//! power    := atom ("^" exponent)?
//! exponent := ["-"] INT | "(" ["-"] INT ")"
//! atom     := NUMBER | "h" | "y" INT | FUNC "(" expr ")" | "(" expr ")"
//! FUNC     := "sin" | "cos" | "exp" | "sqrt"
//! NUMBER   := digits ["." digits]          (read as an exact rational)
//! ```
//!
//! Trees are built through folding constructors (constant arithmetic,
//! neutral elements), so `parse(print(e)) == e` for every tree built by this
//! module.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{EvalError, ParseError};
use crate::scalar::Real;
use crate::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Sqrt,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Sqrt => "sqrt",
        }
    }

    fn from_name(s: &str) -> Option<Func> {
        match s {
            "sin" => Some(Func::Sin),
            "cos" => Some(Func::Cos),
            "exp" => Some(Func::Exp),
            "sqrt" => Some(Func::Sqrt),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Node {
    Const(Rational),
    Hbar,
    /// Zero-based variable index (`y1` is 0).
    Var(usize),
    Add(Expr, Expr),
    Sub(Expr, Expr),
    Mul(Expr, Expr),
    Div(Expr, Expr),
    Neg(Expr),
    Pow(Expr, i32),
    Apply(Func, Expr),
}

/// Immutable expression tree with shared subtrees.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Expr(Arc<Node>);

/// Differentiation variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    Hbar,
    /// Zero-based.
    Y(usize),
}

impl Expr {
    fn node(n: Node) -> Expr {
        Expr(Arc::new(n))
    }

    pub fn constant(q: Rational) -> Expr {
        Self::node(Node::Const(q))
    }

    pub fn int(v: i64) -> Expr {
        Self::constant(Rational::from_integer(v.into()))
    }

    pub fn zero() -> Expr {
        Self::int(0)
    }

    pub fn one() -> Expr {
        Self::int(1)
    }

    pub fn hbar() -> Expr {
        Self::node(Node::Hbar)
    }

    /// Zero-based `y_{i+1}`.
    pub fn var(i: usize) -> Expr {
        Self::node(Node::Var(i))
    }

    pub fn as_const(&self) -> Option<&Rational> {
        match &*self.0 {
            Node::Const(q) => Some(q),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_const().is_some_and(Zero::is_zero)
    }

    fn is_one(&self) -> bool {
        self.as_const().is_some_and(One::is_one)
    }

    pub fn add(a: &Expr, b: &Expr) -> Expr {
        match (a.as_const(), b.as_const()) {
            (Some(x), Some(y)) => Self::constant(x + y),
            _ if a.is_zero() => b.clone(),
            _ if b.is_zero() => a.clone(),
            _ => Self::node(Node::Add(a.clone(), b.clone())),
        }
    }

    pub fn sub(a: &Expr, b: &Expr) -> Expr {
        match (a.as_const(), b.as_const()) {
            (Some(x), Some(y)) => Self::constant(x - y),
            _ if b.is_zero() => a.clone(),
            _ if a.is_zero() => Self::neg(b),
            _ => Self::node(Node::Sub(a.clone(), b.clone())),
        }
    }

    pub fn mul(a: &Expr, b: &Expr) -> Expr {
        match (a.as_const(), b.as_const()) {
            (Some(x), Some(y)) => Self::constant(x * y),
            _ if a.is_zero() || b.is_zero() => Self::zero(),
            _ if a.is_one() => b.clone(),
            _ if b.is_one() => a.clone(),
            _ => Self::node(Node::Mul(a.clone(), b.clone())),
        }
    }

    /// Folds only when the divisor is a nonzero constant one, so that
    /// division by zero is still reported at evaluation time.
    pub fn div(a: &Expr, b: &Expr) -> Expr {
        match (a.as_const(), b.as_const()) {
            (Some(x), Some(y)) if !y.is_zero() => Self::constant(x / y),
            _ if b.is_one() => a.clone(),
            _ => Self::node(Node::Div(a.clone(), b.clone())),
        }
    }

    pub fn neg(a: &Expr) -> Expr {
        match &*a.0 {
            Node::Const(q) => Self::constant(-q),
            Node::Neg(inner) => inner.clone(),
            _ => Self::node(Node::Neg(a.clone())),
        }
    }

    pub fn pow(a: &Expr, n: i32) -> Expr {
        if n == 0 {
            return Self::one();
        }
        if n == 1 {
            return a.clone();
        }
        if let Some(q) = a.as_const() {
            if !q.is_zero() || n > 0 {
                return Self::constant(rational_pow(q, n));
            }
        }
        Self::node(Node::Pow(a.clone(), n))
    }

    pub fn apply(f: Func, a: &Expr) -> Expr {
        if f == Func::Sqrt {
            if let Some(q) = a.as_const() {
                if let Some(r) = exact_sqrt(q) {
                    return Self::constant(r);
                }
            }
        }
        if let (Func::Exp | Func::Cos, Some(q)) = (f, a.as_const()) {
            if q.is_zero() {
                return Self::one();
            }
        }
        if let (Func::Sin, Some(q)) = (f, a.as_const()) {
            if q.is_zero() {
                return Self::zero();
            }
        }
        Self::node(Node::Apply(f, a.clone()))
    }

    /// Largest zero-based variable index used, if any.
    pub fn max_var(&self) -> Option<usize> {
        match &*self.0 {
            Node::Const(_) | Node::Hbar => None,
            Node::Var(i) => Some(*i),
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                a.max_var().max(b.max_var())
            }
            Node::Neg(a) | Node::Pow(a, _) | Node::Apply(_, a) => a.max_var(),
        }
    }

    pub fn depends_on_hbar(&self) -> bool {
        match &*self.0 {
            Node::Const(_) | Node::Var(_) => false,
            Node::Hbar => true,
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                a.depends_on_hbar() || b.depends_on_hbar()
            }
            Node::Neg(a) | Node::Pow(a, _) | Node::Apply(_, a) => a.depends_on_hbar(),
        }
    }

    /// Number of nodes, counting shared subtrees once per use.
    pub fn size(&self) -> usize {
        match &*self.0 {
            Node::Const(_) | Node::Hbar | Node::Var(_) => 1,
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => 1 + a.size() + b.size(),
            Node::Neg(a) | Node::Pow(a, _) | Node::Apply(_, a) => 1 + a.size(),
        }
    }

    /// Exact symbolic partial derivative.
    pub fn derivative(&self, v: Var) -> Expr {
        match &*self.0 {
            Node::Const(_) => Expr::zero(),
            Node::Hbar => Expr::int((v == Var::Hbar) as i64),
            Node::Var(i) => Expr::int((v == Var::Y(*i)) as i64),
            Node::Add(a, b) => Expr::add(&a.derivative(v), &b.derivative(v)),
            Node::Sub(a, b) => Expr::sub(&a.derivative(v), &b.derivative(v)),
            Node::Mul(a, b) => Expr::add(&Expr::mul(&a.derivative(v), b), &Expr::mul(a, &b.derivative(v))),
            Node::Div(a, b) => {
                let num = Expr::sub(&Expr::mul(&a.derivative(v), b), &Expr::mul(a, &b.derivative(v)));
                Expr::div(&num, &Expr::pow(b, 2))
            }
            Node::Neg(a) => Expr::neg(&a.derivative(v)),
            Node::Pow(a, n) => {
                let outer = Expr::mul(&Expr::int(*n as i64), &Expr::pow(a, n - 1));
                Expr::mul(&outer, &a.derivative(v))
            }
            Node::Apply(f, a) => {
                let da = a.derivative(v);
                if da.is_zero() {
                    return Expr::zero();
                }
                let outer = match f {
                    Func::Sin => Expr::apply(Func::Cos, a),
                    Func::Cos => Expr::neg(&Expr::apply(Func::Sin, a)),
                    Func::Exp => self.clone(),
                    Func::Sqrt => return Expr::div(&da, &Expr::mul(&Expr::int(2), self)),
                };
                Expr::mul(&outer, &da)
            }
        }
    }

    /// `d/dh`
    pub fn d_dh(&self) -> Expr {
        self.derivative(Var::Hbar)
    }

    /// `d/dy_i`, zero-based.
    pub fn d_dy(&self, i: usize) -> Expr {
        self.derivative(Var::Y(i))
    }

    /// Replaces `h` and the variables by the given expressions.
    pub fn substitute(&self, hbar: &Expr, vars: &dyn Fn(usize) -> Expr) -> Expr {
        match &*self.0 {
            Node::Const(_) => self.clone(),
            Node::Hbar => hbar.clone(),
            Node::Var(i) => vars(*i),
            Node::Add(a, b) => Expr::add(&a.substitute(hbar, vars), &b.substitute(hbar, vars)),
            Node::Sub(a, b) => Expr::sub(&a.substitute(hbar, vars), &b.substitute(hbar, vars)),
            Node::Mul(a, b) => Expr::mul(&a.substitute(hbar, vars), &b.substitute(hbar, vars)),
            Node::Div(a, b) => Expr::div(&a.substitute(hbar, vars), &b.substitute(hbar, vars)),
            Node::Neg(a) => Expr::neg(&a.substitute(hbar, vars)),
            Node::Pow(a, n) => Expr::pow(&a.substitute(hbar, vars), *n),
            Node::Apply(f, a) => Expr::apply(*f, &a.substitute(hbar, vars)),
        }
    }

    /// `e(h, y + h k)`
    pub fn shift(&self, k: &[i64]) -> Expr {
        if k.iter().all(|&x| x == 0) {
            return self.clone();
        }
        let h = Expr::hbar();
        self.substitute(&h, &|i| {
            let ki = k.get(i).copied().unwrap_or(0);
            Expr::add(&Expr::var(i), &Expr::mul(&Expr::int(ki), &h))
        })
    }

    /// `e(0, y)`
    pub fn at_hbar_zero(&self) -> Expr {
        self.substitute(&Expr::zero(), &Expr::var)
    }

    /// Floating point evaluation; `y[i]` is the value of `y_{i+1}`.
    pub fn eval<F: Real>(&self, hbar: F, y: &[F]) -> Result<F, EvalError> {
        let fail = |reason: &str| EvalError { subexpr: self.to_string(), reason: reason.to_string() };
        Ok(match &*self.0 {
            Node::Const(q) => F::from_rational(q),
            Node::Hbar => hbar,
            Node::Var(i) => *y.get(*i).ok_or_else(|| fail("variable index out of range"))?,
            Node::Add(a, b) => a.eval(hbar, y)? + b.eval(hbar, y)?,
            Node::Sub(a, b) => a.eval(hbar, y)? - b.eval(hbar, y)?,
            Node::Mul(a, b) => a.eval(hbar, y)? * b.eval(hbar, y)?,
            Node::Div(a, b) => {
                let d = b.eval(hbar, y)?;
                if d == F::zero() {
                    return Err(fail("division by zero"));
                }
                a.eval(hbar, y)? / d
            }
            Node::Neg(a) => -a.eval(hbar, y)?,
            Node::Pow(a, n) => {
                let base = a.eval(hbar, y)?;
                if *n < 0 && base == F::zero() {
                    return Err(fail("negative power of zero"));
                }
                base.powi(*n)
            }
            Node::Apply(f, a) => {
                let x = a.eval(hbar, y)?;
                match f {
                    Func::Sin => x.sin(),
                    Func::Cos => x.cos(),
                    Func::Exp => x.exp(),
                    Func::Sqrt => {
                        if x < F::zero() {
                            return Err(fail("square root of a negative number"));
                        }
                        x.sqrt()
                    }
                }
            }
        })
    }

    fn level(&self) -> u8 {
        match &*self.0 {
            Node::Add(..) | Node::Sub(..) => 1,
            Node::Mul(..) | Node::Div(..) => 2,
            Node::Neg(_) => 3,
            Node::Pow(..) => 4,
            _ => 5,
        }
    }

    fn write_at(&self, f: &mut fmt::Formatter<'_>, min_level: u8) -> fmt::Result {
        if self.level() < min_level {
            write!(f, "(")?;
            self.write_at(f, 0)?;
            return write!(f, ")");
        }
        match &*self.0 {
            Node::Const(q) => {
                if q.is_integer() && !q.is_negative() {
                    write!(f, "{}", q.numer())
                } else if q.is_integer() {
                    write!(f, "({})", q.numer())
                } else {
                    write!(f, "({}/{})", q.numer(), q.denom())
                }
            }
            Node::Hbar => write!(f, "h"),
            Node::Var(i) => write!(f, "y{}", i + 1),
            Node::Add(a, b) => {
                a.write_at(f, 1)?;
                write!(f, " + ")?;
                b.write_at(f, 2)
            }
            Node::Sub(a, b) => {
                a.write_at(f, 1)?;
                write!(f, " - ")?;
                b.write_at(f, 2)
            }
            Node::Mul(a, b) => {
                a.write_at(f, 2)?;
                write!(f, "*")?;
                b.write_at(f, 3)
            }
            Node::Div(a, b) => {
                a.write_at(f, 2)?;
                write!(f, "/")?;
                b.write_at(f, 3)
            }
            Node::Neg(a) => {
                write!(f, "-")?;
                a.write_at(f, 3)
            }
            Node::Pow(a, n) => {
                a.write_at(f, 5)?;
                if *n < 0 {
                    write!(f, "^({n})")
                } else {
                    write!(f, "^{n}")
                }
            }
            Node::Apply(func, a) => {
                write!(f, "{}(", func.name())?;
                a.write_at(f, 0)?;
                write!(f, ")")
            }
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_at(f, 0)
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({self})")
    }
}

fn rational_pow(q: &Rational, n: i32) -> Rational {
    let base = if n < 0 { q.recip() } else { q.clone() };
    (0..n.unsigned_abs()).fold(Rational::one(), |acc, _| acc * &base)
}

fn exact_sqrt(q: &Rational) -> Option<Rational> {
    if q.is_negative() {
        return None;
    }
    let isqrt = |x: &BigInt| {
        let r = x.sqrt();
        (&r * &r == *x).then_some(r)
    };
    Some(Rational::new(isqrt(q.numer())?, isqrt(q.denom())?))
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(Rational),
    Ident(String),
    Sym(char),
    End,
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn tokens(src: &'a str) -> Result<Vec<(Tok, usize)>, ParseError> {
        let mut lx = Lexer { src, pos: 0 };
        let mut out = Vec::new();
        loop {
            let t = lx.next()?;
            let end = t.0 == Tok::End;
            out.push(t);
            if end {
                return Ok(out);
            }
        }
    }

    fn next(&mut self) -> Result<(Tok, usize), ParseError> {
        let bytes = self.src.as_bytes();
        while self.pos < bytes.len() && bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        let start = self.pos;
        let Some(&c) = bytes.get(self.pos) else { return Ok((Tok::End, start)) };
        if c.is_ascii_digit() || c == b'.' {
            while self.pos < bytes.len() && bytes[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            let int_part = &self.src[start..self.pos];
            let mut value: Rational = if int_part.is_empty() {
                Rational::zero()
            } else {
                Rational::from_integer(int_part.parse::<BigInt>().expect("digits"))
            };
            if bytes.get(self.pos) == Some(&b'.') {
                self.pos += 1;
                let frac_start = self.pos;
                while self.pos < bytes.len() && bytes[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
                let frac = &self.src[frac_start..self.pos];
                if frac.is_empty() && int_part.is_empty() {
                    return Err(ParseError { position: start, message: "malformed number".into() });
                }
                if !frac.is_empty() {
                    let num: BigInt = frac.parse().expect("digits");
                    let den = BigInt::from(10).pow(frac.len() as u32);
                    value += Rational::new(num, den);
                }
            }
            return Ok((Tok::Num(value), start));
        }
        if c.is_ascii_alphabetic() {
            while self.pos < bytes.len() && (bytes[self.pos].is_ascii_alphanumeric() || bytes[self.pos] == b'_') {
                self.pos += 1;
            }
            return Ok((Tok::Ident(self.src[start..self.pos].to_string()), start));
        }
        if "+-*/^()".contains(c as char) {
            self.pos += 1;
            return Ok((Tok::Sym(c as char), start));
        }
        let ch = self.src[start..].chars().next().expect("nonempty");
        Err(ParseError { position: start, message: format!("unexpected character '{ch}'") })
    }
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    at: usize,
    dim: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> usize {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn error_here(&self, what: &str) -> ParseError {
        let found = match self.peek() {
            Tok::Num(q) => format!("number {q}"),
            Tok::Ident(s) => format!("identifier '{s}'"),
            Tok::Sym(c) => format!("token '{c}'"),
            Tok::End => "end of input".to_string(),
        };
        ParseError { position: self.pos(), message: format!("expected {what}, found {found}") }
    }

    fn expect_sym(&mut self, c: char) -> Result<(), ParseError> {
        if *self.peek() == Tok::Sym(c) {
            self.bump();
            Ok(())
        } else {
            Err(self.error_here(&format!("'{c}'")))
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Tok::Sym('+') => {
                    self.bump();
                    lhs = Expr::add(&lhs, &self.term()?);
                }
                Tok::Sym('-') => {
                    self.bump();
                    lhs = Expr::sub(&lhs, &self.term()?);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Tok::Sym('*') => {
                    self.bump();
                    lhs = Expr::mul(&lhs, &self.unary()?);
                }
                Tok::Sym('/') => {
                    self.bump();
                    lhs = Expr::div(&lhs, &self.unary()?);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if *self.peek() == Tok::Sym('-') {
            self.bump();
            return Ok(Expr::neg(&self.unary()?));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if *self.peek() != Tok::Sym('^') {
            return Ok(base);
        }
        self.bump();
        let parens = *self.peek() == Tok::Sym('(');
        if parens {
            self.bump();
        }
        let negative = *self.peek() == Tok::Sym('-');
        if negative {
            self.bump();
        }
        let pos = self.pos();
        let n = match self.bump() {
            Tok::Num(q) if q.is_integer() => q
                .to_integer()
                .to_i32()
                .ok_or(ParseError { position: pos, message: "exponent too large".into() })?,
            _ => return Err(ParseError { position: pos, message: "expected an integer exponent".into() }),
        };
        if parens {
            self.expect_sym(')')?;
        }
        Ok(Expr::pow(&base, if negative { -n } else { n }))
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Num(q) => {
                self.bump();
                Ok(Expr::constant(q))
            }
            Tok::Sym('(') => {
                self.bump();
                let e = self.expr()?;
                self.expect_sym(')')?;
                Ok(e)
            }
            Tok::Ident(name) => {
                self.bump();
                if name == "h" {
                    return Ok(Expr::hbar());
                }
                if let Some(f) = Func::from_name(&name) {
                    self.expect_sym('(')?;
                    let arg = self.expr()?;
                    self.expect_sym(')')?;
                    return Ok(Expr::apply(f, &arg));
                }
                if let Some(idx) = name.strip_prefix('y').and_then(|s| s.parse::<usize>().ok()) {
                    if idx == 0 || idx > self.dim {
                        return Err(ParseError {
                            position: pos,
                            message: format!("variable y{idx} out of range 1..={}", self.dim),
                        });
                    }
                    return Ok(Expr::var(idx - 1));
                }
                Err(ParseError { position: pos, message: format!("unknown identifier '{name}'") })
            }
            _ => Err(self.error_here("an operand")),
        }
    }
}

/// Parses an expression in the variables `h, y1, ..., y{dim}`.
pub fn parse(text: &str, dim: usize) -> Result<Expr, ParseError> {
    let toks = Lexer::tokens(text)?;
    let mut p = Parser { toks, at: 0, dim };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(p.error_here("an operator or end of input"));
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat;
    use proptest::prelude::*;

    fn ev(e: &Expr, h: f64, y: &[f64]) -> f64 {
        e.eval(h, y).unwrap()
    }

    #[test]
    fn parses_examples() {
        let e = parse("y1*(1-y1)", 1).unwrap();
        assert_eq!(e.to_string(), "y1*(1 - y1)");
        assert_eq!(ev(&e, 0.0, &[0.5]), 0.25);
        let s = parse("sqrt(2*(y1 - 1/2))", 1).unwrap();
        assert_eq!(s.to_string(), "sqrt(2*(y1 - (1/2)))");
        assert!((ev(&s, 0.0, &[1.0]) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn syntax_errors_carry_positions() {
        let err = parse("y1 + * 3", 1).unwrap_err();
        assert_eq!(err.position, 5);
        assert!(err.message.contains("'*'"), "{}", err.message);
        assert!(parse("y1 +", 1).is_err());
        assert!(parse("(y1", 1).is_err());
        assert!(parse("y1 y1", 1).is_err());
        assert!(parse("y1 $ 2", 1).unwrap_err().message.contains("unexpected character"));
    }

    #[test]
    fn identifier_errors() {
        assert!(parse("z + 1", 1).unwrap_err().message.contains("unknown identifier"));
        assert!(parse("log(y1)", 1).unwrap_err().message.contains("unknown identifier"));
        assert!(parse("y3", 2).unwrap_err().message.contains("out of range"));
        assert!(parse("y0", 2).is_err());
        assert!(parse("y1^1.5", 1).is_err());
    }

    #[test]
    fn precedence() {
        assert_eq!(ev(&parse("-y1^2", 1).unwrap(), 0.0, &[3.0]), -9.0);
        assert_eq!(ev(&parse("2*-y1", 1).unwrap(), 0.0, &[3.0]), -6.0);
        assert_eq!(ev(&parse("1 - 2 - 3", 1).unwrap(), 0.0, &[0.0]), -4.0);
        assert_eq!(ev(&parse("8/2/2", 1).unwrap(), 0.0, &[0.0]), 2.0);
        assert_eq!(ev(&parse("y1^-2", 1).unwrap(), 0.0, &[2.0]), 0.25);
        assert_eq!(ev(&parse("y1^(-2)*4 + h", 1).unwrap(), 0.5, &[2.0]), 1.5);
        assert_eq!(parse("0.25", 1).unwrap().as_const(), Some(&rat(1, 4)));
    }

    #[test]
    fn derivative_examples() {
        assert_eq!(parse("h*y1", 1).unwrap().d_dh(), parse("y1", 1).unwrap());
        let d = parse("y1*(1-y1)", 1).unwrap().d_dy(0);
        let expected = parse("1-2*y1", 1).unwrap();
        for y in [-1.3, 0.0, 0.2, 0.7, 2.5] {
            assert!((ev(&d, 0.0, &[y]) - ev(&expected, 0.0, &[y])).abs() < 1e-14);
        }
        let ds = parse("sqrt(y1)", 1).unwrap().d_dy(0);
        assert!((ev(&ds, 0.0, &[4.0]) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn domain_errors_name_the_subexpression() {
        let e = parse("1 + sqrt(y1)", 1).unwrap();
        let err = e.eval(0.0, &[-1.0]).unwrap_err();
        assert_eq!(err.subexpr, "sqrt(y1)");
        let d = parse("1/(y1 - 1)", 1).unwrap();
        assert!(d.eval(0.0, &[1.0]).unwrap_err().reason.contains("division by zero"));
        assert!(parse("y1^(-1)", 1).unwrap().eval(0.0, &[0.0]).is_err());
    }

    #[test]
    fn shift_substitutes_translation() {
        let e = parse("y1*y2 + h", 2).unwrap();
        let s = e.shift(&[1, -2]);
        let (h, y1, y2) = (0.1, 0.3, 0.4);
        assert!((ev(&s, h, &[y1, y2]) - ((y1 + h) * (y2 - 2.0 * h) + h)).abs() < 1e-15);
        assert_eq!(e.at_hbar_zero(), parse("y1*y2", 2).unwrap());
    }

    #[test]
    fn f32_evaluation() {
        let e = parse("sin(y1)^2 + cos(y1)^2", 1).unwrap();
        assert!((e.eval(0.0f32, &[0.7f32]).unwrap() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn hbar_derivative_matches_central_difference() {
        let e = parse("exp(h*y1)*sin(y1 + 2*h) - h^3/(1 + y1^2)", 1).unwrap();
        let d = e.d_dh();
        let step = 1e-5;
        for (h, y) in [(0.0, 0.3), (0.1, -0.4), (0.25, 1.2)] {
            let fd = (ev(&e, h + step, &[y]) - ev(&e, h - step, &[y])) / (2.0 * step);
            let sym = ev(&d, h, &[y]);
            assert!((sym - fd).abs() <= 1e-8 * (1.0 + sym.abs()));
        }
    }

    /// Random expressions built from operations that stay smooth and bounded
    /// on `[-1, 1]^3`.
    fn smooth_expr() -> impl Strategy<Value = Expr> {
        let leaf = prop_oneof![
            (-4i64..5, 1i64..4).prop_map(|(a, b)| Expr::constant(rat(a, b))),
            Just(Expr::hbar()),
            (0usize..2).prop_map(Expr::var),
        ];
        leaf.prop_recursive(4, 24, 2, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::add(&a, &b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::sub(&a, &b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::mul(&a, &b)),
                (inner.clone(), inner.clone())
                    .prop_map(|(a, b)| Expr::div(&a, &Expr::add(&Expr::int(2), &Expr::pow(&b, 2)))),
                inner.clone().prop_map(|a| Expr::neg(&a)),
                (inner.clone(), 0i32..4).prop_map(|(a, n)| Expr::pow(&a, n)),
                inner.clone().prop_map(|a| Expr::apply(Func::Sin, &a)),
                inner.clone().prop_map(|a| Expr::apply(Func::Cos, &a)),
                inner.clone().prop_map(|a| Expr::apply(Func::Exp, &Expr::apply(Func::Sin, &a))),
                inner.prop_map(|a| Expr::apply(Func::Sqrt, &Expr::add(&Expr::int(1), &Expr::pow(&a, 2)))),
            ]
        })
    }

    fn central(e: &Expr, v: Var, h: f64, y: [f64; 2], step: f64) -> f64 {
        let (mut hp, mut hm, mut yp, mut ym) = (h, h, y, y);
        match v {
            Var::Hbar => {
                hp += step;
                hm -= step;
            }
            Var::Y(i) => {
                yp[i] += step;
                ym[i] -= step;
            }
        }
        (ev(e, hp, &yp) - ev(e, hm, &ym)) / (2.0 * step)
    }

    proptest! {
        #[test]
        fn print_then_parse_is_identity(e in smooth_expr()) {
            let text = e.to_string();
            let back = parse(&text, 2).unwrap();
            prop_assert_eq!(back, e);
        }

        #[test]
        fn derivatives_match_finite_differences(
            e in smooth_expr(),
            h in -0.5f64..0.5,
            y1 in -1.0f64..1.0,
            y2 in -1.0f64..1.0,
        ) {
            let value = ev(&e, h, &[y1, y2]);
            prop_assume!(value.abs() < 1e3);
            for v in [Var::Hbar, Var::Y(0), Var::Y(1)] {
                let sym = ev(&e.derivative(v), h, &[y1, y2]);
                let fd = central(&e, v, h, [y1, y2], 1e-5);
                prop_assert!((sym - fd).abs() <= 1e-8 * (1.0 + sym.abs().max(value.abs())),
                    "{e} d/{v:?}: {sym} vs {fd}");
            }
        }
    }
}
