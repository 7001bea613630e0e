//! Exact star products of polynomial symbols.
//!
//! For polynomials the bidifferential series of the Moyal product terminates, so the
//! product is computed coefficient by coefficient. Planck's constant stays a formal
//! variable: every term carries its own power of `hbar`.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{PhaseGrid, SymbolField};

/// Exponents of one monomial `x^x p^p hbar^h`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial {
    pub x: u32,
    pub p: u32,
    pub hbar: u32,
}

pub const MAX_DEGREE: usize = 64;
const PRUNE: f64 = 1e-300;

/// Polynomial in `x`, `p` and a formal `hbar`, with complex coefficients.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PolySymbol {
    terms: BTreeMap<Monomial, Complex64>,
}

fn falling(n: u32, k: u32) -> f64 {
    (0..k).map(|i| (n - i) as f64).product()
}

fn binomial(n: u32, k: u32) -> f64 {
    falling(n, k) / falling(k, k)
}

impl PolySymbol {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: Complex64) -> Self {
        Self::monomial(c, 0, 0, 0)
    }

    pub fn one() -> Self {
        Self::constant(Complex64::new(1.0, 0.0))
    }

    pub fn x() -> Self {
        Self::monomial(Complex64::new(1.0, 0.0), 1, 0, 0)
    }

    pub fn p() -> Self {
        Self::monomial(Complex64::new(1.0, 0.0), 0, 1, 0)
    }

    pub fn hbar() -> Self {
        Self::monomial(Complex64::new(1.0, 0.0), 0, 0, 1)
    }

    pub fn monomial(c: Complex64, x: u32, p: u32, hbar: u32) -> Self {
        let mut s = Self::zero();
        s.insert(Monomial { x, p, hbar }, c);
        s
    }

    fn insert(&mut self, m: Monomial, c: Complex64) {
        let e = self.terms.entry(m).or_insert(Complex64::new(0.0, 0.0));
        *e += c;
        if e.norm() <= PRUNE {
            self.terms.remove(&m);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Complex64)> {
        self.terms.iter()
    }

    pub fn coeff(&self, x: u32, p: u32, hbar: u32) -> Complex64 {
        self.terms.get(&Monomial { x, p, hbar }).copied().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree in `x` and `p`.
    pub fn degree(&self) -> usize {
        self.terms.keys().map(|m| (m.x + m.p) as usize).max().unwrap_or(0)
    }

    fn guard(self) -> Result<Self> {
        match self.degree() {
            d if d > MAX_DEGREE => Err(Error::DegreeOverflow(d)),
            _ => Ok(self),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.insert(*m, *c);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let mut out = Self::zero();
        for (m, v) in &self.terms {
            out.insert(*m, v * c);
        }
        out
    }

    /// Ordinary commutative product.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        let mut out = Self::zero();
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                let m = Monomial { x: a.x + b.x, p: a.p + b.p, hbar: a.hbar + b.hbar };
                out.insert(m, ca * cb);
            }
        }
        out.guard()
    }

    pub fn pow(&self, k: u32) -> Result<Self> {
        let mut out = Self::one();
        for _ in 0..k {
            out = out.mul(self)?;
        }
        Ok(out)
    }

    /// Complex conjugation of the coefficients (`hbar` is real).
    pub fn conj(&self) -> Self {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            out.insert(*m, c.conj());
        }
        out
    }

    /// Largest coefficient modulus.
    pub fn max_coeff(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Substitutes a numerical `hbar`, leaving a polynomial in `x` and `p`.
    pub fn at_hbar(&self, hbar: f64) -> Self {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            out.insert(Monomial { hbar: 0, ..*m }, c * hbar.powi(m.hbar as i32));
        }
        out
    }

    pub fn eval(&self, x: f64, p: f64, hbar: f64) -> Complex64 {
        self.terms
            .iter()
            .map(|(m, c)| c * (x.powi(m.x as i32) * p.powi(m.p as i32) * hbar.powi(m.hbar as i32)))
            .sum()
    }

    /// Samples the symbol on a grid, using the grid's Planck constant.
    pub fn sample(&self, grid: PhaseGrid) -> Result<SymbolField> {
        let h = grid.hbar();
        let field = SymbolField::sample(grid, |x, p| self.eval(x, p, h))?;
        if self.terms.values().all(|c| c.im == 0.0) {
            field.checked_real()
        } else {
            Ok(field)
        }
    }

    /// `d^i/dx^i d^j/dp^j`.
    pub fn derivative(&self, i: u32, j: u32) -> Self {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            if m.x >= i && m.p >= j {
                let f = falling(m.x, i) * falling(m.p, j);
                out.insert(Monomial { x: m.x - i, p: m.p - j, hbar: m.hbar }, c * f);
            }
        }
        out
    }

    /// Each power of `hbar` appears only with odd exponent.
    pub fn is_odd_in_hbar(&self) -> bool {
        self.terms.keys().all(|m| m.hbar % 2 == 1)
    }

    /// Divides by `hbar`; fails if a term has no `hbar` factor.
    pub fn div_hbar(&self) -> Result<Self> {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            if m.hbar == 0 {
                return Err(Error::Unsupported("term without a factor of hbar".into()));
            }
            out.insert(Monomial { hbar: m.hbar - 1, ..*m }, *c);
        }
        Ok(out)
    }
}

/// Exact Moyal product `A * B` with the convention `x * p = x p + i hbar / 2`.
pub fn poly_star(a: &PolySymbol, b: &PolySymbol) -> Result<PolySymbol> {
    expand(a, b, |_| Some(1.0))
}

/// Sum of the order-`k` terms of `A * B`, each weighted by `weight(k)` (skipped on `None`).
fn expand(a: &PolySymbol, b: &PolySymbol, weight: impl Fn(u32) -> Option<f64>) -> Result<PolySymbol> {
    if a.degree() + b.degree() > MAX_DEGREE {
        return Err(Error::DegreeOverflow(a.degree() + b.degree()));
    }
    let half_i = Complex64::new(0.0, 0.5);
    let mut out = PolySymbol::zero();
    for (ma, ca) in &a.terms {
        for (mb, cb) in &b.terms {
            // the series stops once a derivative order exceeds the available degree
            let kmax = (ma.x + ma.p).min(mb.x + mb.p);
            for k in 0..=kmax {
                let Some(w) = weight(k) else { continue };
                let pref = half_i.powu(k) * (w / falling(k, k));
                for j in 0..=k {
                    let (dxa, dpa, dpb, dxb) = (k - j, j, k - j, j);
                    if dxa > ma.x || dpa > ma.p || dpb > mb.p || dxb > mb.x {
                        continue;
                    }
                    let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                    let f = sign
                        * binomial(k, j)
                        * falling(ma.x, dxa)
                        * falling(ma.p, dpa)
                        * falling(mb.p, dpb)
                        * falling(mb.x, dxb);
                    let m = Monomial {
                        x: ma.x - dxa + mb.x - dxb,
                        p: ma.p - dpa + mb.p - dpb,
                        hbar: ma.hbar + mb.hbar + k,
                    };
                    out.insert(m, ca * cb * pref * f);
                }
            }
        }
    }
    out.guard()
}

/// `A * B - B * A`, built from the odd orders of `A * B` so that every term carries an
/// odd power of `hbar`.
pub fn poly_moyal_bracket(a: &PolySymbol, b: &PolySymbol) -> Result<PolySymbol> {
    expand(a, b, |k| (k % 2 == 1).then_some(2.0))
}

/// Classical bracket `dA/dx dB/dp - dA/dp dB/dx`.
pub fn poly_poisson_bracket(a: &PolySymbol, b: &PolySymbol) -> Result<PolySymbol> {
    let l = a.derivative(1, 0).mul(&b.derivative(0, 1))?;
    let r = a.derivative(0, 1).mul(&b.derivative(1, 0))?;
    Ok(l.sub(&r))
}

/// Sign and magnitude of a coefficient; complex values keep their own signs.
fn split_coeff(c: &Complex64) -> (bool, String) {
    match (c.re, c.im) {
        (re, im) if im == 0.0 => (re < 0.0, format!("{}", re.abs())),
        (re, im) if re == 0.0 => (im < 0.0, format!("{}i", im.abs())),
        (re, im) => (false, format!("({re}{im:+}i)")),
    }
}

impl PolySymbol {
    /// Name of a monomial such as `x^2 p hbar`, or `1` for the constant term.
    pub fn monomial_name(m: &Monomial) -> String {
        let mut parts = Vec::new();
        for (name, e) in [("x", m.x), ("p", m.p), ("hbar", m.hbar)] {
            match e {
                0 => {}
                1 => parts.push(name.to_string()),
                e => parts.push(format!("{name}^{e}")),
            }
        }
        if parts.is_empty() {
            "1".into()
        } else {
            parts.join(" ")
        }
    }
}

impl fmt::Display for PolySymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (m, c)) in self.terms.iter().rev().enumerate() {
            let (negative, mag) = split_coeff(c);
            let name = Self::monomial_name(m);
            let term = match (mag.as_str(), name.as_str()) {
                (_, "1") => mag,
                ("1", _) => name,
                _ => format!("{mag} {name}"),
            };
            match (k, negative) {
                (0, true) => write!(f, "-{term}")?,
                (0, false) => write!(f, "{term}")?,
                (_, true) => write!(f, " - {term}")?,
                (_, false) => write!(f, " + {term}")?,
            }
        }
        Ok(())
    }
}
