//! A small expression language for symbols and superpotentials.
//!
//! Grammar: numbers, `x`, `p`, parameter identifiers, `+ - * / ^`, `exp(...)` and
//! parentheses. `^` binds tighter than unary minus and is right associative, so
//! `-x^2^2` is `-(x^(2^2))`.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::poly::PolySymbol;

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    X,
    P,
    Param(String),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Exp(Box<Expr>),
}

fn parse_error(pos: usize, message: impl Into<String>) -> Error {
    Error::Parse { pos, message: message.into() }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            if self.eat(b'+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat(b'-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat(b'*') {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat(b'/') {
                lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat(b'-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        if self.eat(b'+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.primary()?;
        if self.eat(b'^') {
            return Ok(Expr::Pow(Box::new(base), Box::new(self.unary()?)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr> {
        let start = match self.peek() {
            Some(_) => self.pos,
            None => return Err(parse_error(self.pos, "unexpected end of input")),
        };
        let c = self.src[start];
        if self.eat(b'(') {
            let e = self.expr()?;
            if !self.eat(b')') {
                return Err(parse_error(self.pos, "expected ')'"));
            }
            return Ok(e);
        }
        if c.is_ascii_digit() || c == b'.' {
            return self.number();
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            while self.pos < self.src.len() && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_') {
                self.pos += 1;
            }
            let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
            return Ok(match name {
                "x" => Expr::X,
                "p" => Expr::P,
                "exp" => {
                    if !self.eat(b'(') {
                        return Err(parse_error(self.pos, "expected '(' after exp"));
                    }
                    let e = self.expr()?;
                    if !self.eat(b')') {
                        return Err(parse_error(self.pos, "expected ')'"));
                    }
                    Expr::Exp(Box::new(e))
                }
                _ => {
                    if self.peek() == Some(b'(') {
                        return Err(parse_error(start, format!("unknown function {name:?}")));
                    }
                    Expr::Param(name.to_string())
                }
            });
        }
        Err(parse_error(start, format!("unexpected character {:?}", c as char)))
    }

    fn number(&mut self) -> Result<Expr> {
        let start = self.pos;
        let digits = |p: &mut Self| {
            while p.pos < p.src.len() && p.src[p.pos].is_ascii_digit() {
                p.pos += 1;
            }
        };
        digits(self);
        if self.pos < self.src.len() && self.src[self.pos] == b'.' {
            self.pos += 1;
            digits(self);
        }
        if self.pos < self.src.len() && matches!(self.src[self.pos], b'e' | b'E') {
            let mut look = self.pos + 1;
            if look < self.src.len() && matches!(self.src[look], b'+' | b'-') {
                look += 1;
            }
            if look < self.src.len() && self.src[look].is_ascii_digit() {
                self.pos = look;
                digits(self);
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        text.parse::<f64>()
            .map(Expr::Num)
            .map_err(|_| parse_error(start, format!("bad number {text:?}")))
    }
}

/// Parses an expression; errors carry the byte offset of the problem.
pub fn parse(src: &str) -> Result<Expr> {
    let mut p = Parser { src: src.as_bytes(), pos: 0 };
    let e = p.expr()?;
    if p.peek().is_some() {
        return Err(parse_error(p.pos, format!("unexpected {:?}", p.src[p.pos] as char)));
    }
    Ok(e)
}

fn num(v: f64) -> Expr {
    Expr::Num(v)
}

fn add(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        (Expr::Num(u), _) if *u == 0.0 => b,
        (_, Expr::Num(v)) if *v == 0.0 => a,
        (Expr::Num(u), Expr::Num(v)) => num(u + v),
        _ => Expr::Add(Box::new(a), Box::new(b)),
    }
}

fn sub(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        (_, Expr::Num(v)) if *v == 0.0 => a,
        (Expr::Num(u), _) if *u == 0.0 => neg(b),
        (Expr::Num(u), Expr::Num(v)) => num(u - v),
        _ => Expr::Sub(Box::new(a), Box::new(b)),
    }
}

fn neg(a: Expr) -> Expr {
    match a {
        Expr::Num(u) => num(-u),
        Expr::Neg(inner) => *inner,
        _ => Expr::Neg(Box::new(a)),
    }
}

fn mul(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        (Expr::Num(u), _) | (_, Expr::Num(u)) if *u == 0.0 => num(0.0),
        (Expr::Num(u), _) if *u == 1.0 => b,
        (_, Expr::Num(v)) if *v == 1.0 => a,
        (Expr::Num(u), Expr::Num(v)) => num(u * v),
        _ => Expr::Mul(Box::new(a), Box::new(b)),
    }
}

fn div(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        (Expr::Num(u), _) if *u == 0.0 => num(0.0),
        (_, Expr::Num(v)) if *v == 1.0 => a,
        _ => Expr::Div(Box::new(a), Box::new(b)),
    }
}

fn pow(a: Expr, b: Expr) -> Expr {
    match &b {
        Expr::Num(v) if *v == 0.0 => num(1.0),
        Expr::Num(v) if *v == 1.0 => a,
        _ => Expr::Pow(Box::new(a), Box::new(b)),
    }
}

fn powf(b: f64, e: f64) -> f64 {
    if e.fract() == 0.0 && e.abs() <= i32::MAX as f64 {
        b.powi(e as i32)
    } else {
        b.powf(e)
    }
}

impl Expr {
    /// Parameter names in order of first appearance.
    pub fn params(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.visit(&mut |e| {
            if let Expr::Param(n) = e {
                if !out.contains(n) {
                    out.push(n.clone());
                }
            }
        });
        out
    }

    pub fn uses_x(&self) -> bool {
        let mut hit = false;
        self.visit(&mut |e| hit |= matches!(e, Expr::X));
        hit
    }

    pub fn uses_p(&self) -> bool {
        let mut hit = false;
        self.visit(&mut |e| hit |= matches!(e, Expr::P));
        hit
    }

    fn visit<F: FnMut(&Expr)>(&self, f: &mut F) {
        f(self);
        match self {
            Expr::Neg(a) | Expr::Exp(a) => a.visit(f),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) | Expr::Pow(a, b) => {
                a.visit(f);
                b.visit(f);
            }
            _ => {}
        }
    }

    /// Replaces parameters by values; every parameter must be bound.
    pub fn bind(&self, values: &BTreeMap<String, f64>) -> Result<Expr> {
        let b = |e: &Expr| e.bind(values).map(Box::new);
        Ok(match self {
            Expr::Param(n) => match values.get(n) {
                Some(v) => num(*v),
                None => return Err(Error::Unsupported(format!("unbound parameter {n:?}"))),
            },
            Expr::Num(_) | Expr::X | Expr::P => self.clone(),
            Expr::Neg(a) => Expr::Neg(b(a)?),
            Expr::Exp(a) => Expr::Exp(b(a)?),
            Expr::Add(l, r) => Expr::Add(b(l)?, b(r)?),
            Expr::Sub(l, r) => Expr::Sub(b(l)?, b(r)?),
            Expr::Mul(l, r) => Expr::Mul(b(l)?, b(r)?),
            Expr::Div(l, r) => Expr::Div(b(l)?, b(r)?),
            Expr::Pow(l, r) => Expr::Pow(b(l)?, b(r)?),
        })
    }

    /// Value at `(x, p)` with parameters looked up in `params`; unbound parameters are NaN.
    pub fn eval_with(&self, x: f64, p: f64, params: &BTreeMap<String, f64>) -> f64 {
        let e = |a: &Expr| a.eval_with(x, p, params);
        match self {
            Expr::Num(v) => *v,
            Expr::X => x,
            Expr::P => p,
            Expr::Param(n) => params.get(n).copied().unwrap_or(f64::NAN),
            Expr::Neg(a) => -e(a),
            Expr::Exp(a) => e(a).exp(),
            Expr::Add(l, r) => e(l) + e(r),
            Expr::Sub(l, r) => e(l) - e(r),
            Expr::Mul(l, r) => e(l) * e(r),
            Expr::Div(l, r) => e(l) / e(r),
            Expr::Pow(l, r) => powf(e(l), e(r)),
        }
    }

    pub fn eval(&self, x: f64, p: f64) -> f64 {
        self.eval_with(x, p, &BTreeMap::new())
    }

    /// Symbolic `d/dx`. Exponents that depend on `x` are rejected (there is no logarithm).
    pub fn dx(&self) -> Result<Expr> {
        Ok(match self {
            Expr::Num(_) | Expr::P | Expr::Param(_) => num(0.0),
            Expr::X => num(1.0),
            Expr::Neg(a) => neg(a.dx()?),
            Expr::Add(l, r) => add(l.dx()?, r.dx()?),
            Expr::Sub(l, r) => sub(l.dx()?, r.dx()?),
            Expr::Mul(l, r) => add(mul(l.dx()?, (**r).clone()), mul((**l).clone(), r.dx()?)),
            Expr::Div(l, r) => div(
                sub(mul(l.dx()?, (**r).clone()), mul((**l).clone(), r.dx()?)),
                pow((**r).clone(), num(2.0)),
            ),
            Expr::Exp(a) => mul(self.clone(), a.dx()?),
            Expr::Pow(base, ex) => {
                if ex.uses_x() {
                    return Err(Error::Unsupported(format!("cannot differentiate {self} in x")));
                }
                let lowered = pow((**base).clone(), sub((**ex).clone(), num(1.0)));
                mul(mul((**ex).clone(), lowered), base.dx()?)
            }
        })
    }

    /// Exact polynomial form when the expression is a polynomial in `x` and `p`.
    pub fn to_poly(&self) -> Option<PolySymbol> {
        let c = |v: f64| PolySymbol::constant(Complex64::new(v, 0.0));
        Some(match self {
            Expr::Num(v) => c(*v),
            Expr::X => PolySymbol::x(),
            Expr::P => PolySymbol::p(),
            Expr::Param(_) | Expr::Exp(_) => return None,
            Expr::Neg(a) => a.to_poly()?.scale(Complex64::new(-1.0, 0.0)),
            Expr::Add(l, r) => l.to_poly()?.add(&r.to_poly()?),
            Expr::Sub(l, r) => l.to_poly()?.sub(&r.to_poly()?),
            Expr::Mul(l, r) => l.to_poly()?.mul(&r.to_poly()?).ok()?,
            Expr::Div(l, r) => match **r {
                Expr::Num(v) if v != 0.0 => l.to_poly()?.scale(Complex64::new(1.0 / v, 0.0)),
                _ => return None,
            },
            Expr::Pow(b, e) => match **e {
                Expr::Num(k) if k >= 0.0 && k.fract() == 0.0 && k <= 64.0 => b.to_poly()?.pow(k as u32).ok()?,
                _ => return None,
            },
        })
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v}"),
            Expr::X => write!(f, "x"),
            Expr::P => write!(f, "p"),
            Expr::Param(n) => write!(f, "{n}"),
            Expr::Neg(a) => write!(f, "-({a})"),
            Expr::Add(l, r) => write!(f, "({l} + {r})"),
            Expr::Sub(l, r) => write!(f, "({l} - {r})"),
            Expr::Mul(l, r) => write!(f, "{l} * {r}"),
            Expr::Div(l, r) => write!(f, "{l} / ({r})"),
            Expr::Pow(l, r) => write!(f, "({l})^({r})"),
            Expr::Exp(a) => write!(f, "exp({a})"),
        }
    }
}
