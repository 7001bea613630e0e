//! Closed-form reference solutions: the harmonic oscillator and the Morse oscillator.
//!
//! Both use the convention `2m = 1`. The oscillator is `H = p^2 + x^2` (so `omega = 2`)
//! and the Morse superpotential is `W(x) = a - b exp(-s x)`.
//!
//! Closed-form Wigner functions are always normalized numerically so that their
//! integral is one. For Morse the textbook normalization constants can then be compared
//! against the numerical ones.

use std::f64::consts::PI;

use faer::linalg::matmul::matmul;
use faer::{Accum, Mat, Par};

use crate::error::{Error, Result};
use crate::grid::{PhaseGrid, SymbolField};
use crate::special::{laguerre, MAX_LAGUERRE};

/// Harmonic oscillator `H = p^2 + x^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShoModel {
    pub hbar: f64,
}

impl ShoModel {
    pub fn new(hbar: f64) -> Result<Self> {
        if !(hbar > 0.0 && hbar.is_finite()) {
            return Err(Error::Domain(format!("hbar = {hbar}")));
        }
        Ok(Self { hbar })
    }

    /// `E_n = 2 hbar (n + 1/2)`.
    pub fn energy(&self, n: usize) -> f64 {
        2.0 * self.hbar * (n as f64 + 0.5)
    }

    /// `P_n = ((-1)^n / (pi hbar)) exp(-r^2 / hbar) L_n(2 r^2 / hbar)` with `r^2 = x^2 + p^2`.
    pub fn wigner_value(&self, n: usize, x: f64, p: f64) -> Result<f64> {
        let r2 = (x * x + p * p) / self.hbar;
        let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
        Ok(sign / (PI * self.hbar) * (-r2).exp() * laguerre(n, 2.0 * r2)?)
    }

    /// Samples `P_n` on a grid whose Planck constant matches the model.
    pub fn wigner(&self, n: usize, grid: PhaseGrid) -> Result<SymbolField> {
        if n > MAX_LAGUERRE {
            return Err(Error::OutOfRange { index: n, limit: MAX_LAGUERRE });
        }
        check_hbar(grid, self.hbar)?;
        SymbolField::sample_real(grid, |x, p| self.wigner_value(n, x, p).unwrap())
    }

    /// Symbol `p^2 + x^2`.
    pub fn hamiltonian(&self, grid: PhaseGrid) -> Result<SymbolField> {
        SymbolField::sample_real(grid, |x, p| x * x + p * p)
    }
}

fn check_hbar(grid: PhaseGrid, hbar: f64) -> Result<()> {
    if grid.hbar() != hbar {
        return Err(Error::Domain(format!("grid hbar {} differs from model hbar {hbar}", grid.hbar())));
    }
    Ok(())
}

pub fn sho_energy(model: &ShoModel, n: usize) -> f64 {
    model.energy(n)
}

pub fn sho_wigner(model: &ShoModel, n: usize, grid: PhaseGrid) -> Result<SymbolField> {
    model.wigner(n, grid)
}

/// Morse oscillator with superpotential `W(x) = a - b exp(-s x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MorseModel {
    pub a: f64,
    pub b: f64,
    pub s: f64,
}

/// A numerically normalized closed-form field and the constant that normalized it.
#[derive(Debug, Clone)]
pub struct NormalizedField {
    pub field: SymbolField,
    /// Factor applied to the unnormalized shape.
    pub constant: f64,
    /// Ratio of `constant` to the textbook normalization, when one exists for the grid.
    pub reference_ratio: Option<f64>,
}

impl MorseModel {
    pub fn new(a: f64, b: f64, s: f64) -> Result<Self> {
        if !(a > 0.0 && b > 0.0 && s > 0.0) {
            return Err(Error::Domain(format!("Morse needs a, b, s > 0 (got {a}, {b}, {s})")));
        }
        Ok(Self { a, b, s })
    }

    /// Deepest ladder level: the last `n` with `a - n hbar s > 0`.
    pub fn n_bound(&self, hbar: f64) -> usize {
        ((self.a / (hbar * self.s)).ceil() as usize).saturating_sub(1)
    }

    /// `E_n = a^2 - (a - n hbar s)^2`.
    pub fn energy(&self, n: usize, hbar: f64) -> Result<f64> {
        let nb = self.n_bound(hbar);
        if n > nb {
            return Err(Error::OutOfRange { index: n, limit: nb });
        }
        let an = self.a - n as f64 * hbar * self.s;
        Ok(self.a * self.a - an * an)
    }

    pub fn w(&self, x: f64) -> f64 {
        self.a - self.b * (-self.s * x).exp()
    }

    /// Ground state `P_0 ~ exp(-2ax/hbar) K_{2ip/(s hbar)}((2b/(s hbar)) exp(-sx))`.
    pub fn ground_wigner(&self, grid: PhaseGrid) -> Result<NormalizedField> {
        let h = grid.hbar();
        let (a, b, s) = (self.a, self.b, self.s);
        let y = move |x: f64| 2.0 * b / (s * h) * (-s * x).exp();
        let shape = bessel_field(grid, 2.0 / (s * h), y, 0.0, |x, ct| (-2.0 * a * x / h - y(x) * ct).exp())?;
        let textbook = 2.0 / (PI * s) * (2.0 * b / a).powf(2.0 * a / s);
        normalize(shape, (h == 1.0).then_some(textbook))
    }

    /// First excited state from the textbook closed form
    /// `alpha(x) K_nu(y) - beta(x) [K_{nu-1}(y) + K_{nu+1}(y)]`, `nu = 2ip/s`, `y = (2b/s) e^{-sx}`.
    ///
    /// The textbook form assumes `hbar = 1`.
    pub fn first_excited_wigner(&self, grid: PhaseGrid) -> Result<NormalizedField> {
        check_hbar(grid, 1.0)?;
        let (a, b, s) = (self.a, self.b, self.s);
        if a - s <= 0.0 {
            return Err(Error::Domain(format!("no first excited level for a = {a}, s = {s}")));
        }
        let y = move |x: f64| 2.0 * b / s * (-s * x).exp();
        // alpha and beta share the factor F below, which is dropped before normalizing
        let l1 = (4.0 * b * b / (2.0 * (2.0 * a - s))).ln();
        let l2 = ((2.0 * a - s) / 2.0).ln();
        let l3 = b.ln();
        let integrand = move |x: f64, ct: f64| {
            let yc = y(x) * ct;
            (l1 - 2.0 * a * x - yc).exp() + (l2 + (2.0 * s - 2.0 * a) * x - yc).exp()
                - 2.0 * ct * (l3 + (s - 2.0 * a) * x - yc).exp()
        };
        let shape = bessel_field(grid, 2.0 / s, y, 1.0, integrand)?;
        let f = (b / (a - s)).powf(-2.0 + 2.0 * a / s) * 2f64.powf(2.0 * a / s) / (PI * s * s);
        normalize(shape, Some(f))
    }
}

fn normalize(shape: SymbolField, textbook: Option<f64>) -> Result<NormalizedField> {
    let total = shape.integrate2d().re;
    if !(total.is_finite() && total != 0.0) {
        return Err(Error::NoConvergence(format!("normalization integral {total}")));
    }
    let constant = 1.0 / total;
    Ok(NormalizedField {
        field: shape.scale_real(constant),
        constant,
        reference_ratio: textbook.map(|c| constant / c),
    })
}

/// Samples `sum_k w_k g(x, cosh t_k) cos(nu(p) t_k)` with `nu(p) = nu_scale p`, the
/// trapezoid rule for `integral_0^inf g(x, cosh t) cos(nu t) dt`, as one matrix product.
///
/// `g` must carry the `exp(-y(x) cosh t)` decay; `growth` bounds any extra `exp(growth t)`.
/// The step is halved until the field changes by less than `1e-10` of its peak.
fn bessel_field<Y, G>(grid: PhaseGrid, nu_scale: f64, y: Y, growth: f64, g: G) -> Result<SymbolField>
where
    Y: Fn(f64) -> f64,
    G: Fn(f64, f64) -> f64 + Sync,
{
    let xs = grid.xs();
    let ps = grid.ps();
    let y_min = xs.iter().map(|&x| y(x)).fold(f64::INFINITY, f64::min);
    if !(y_min > 0.0) {
        return Err(Error::Domain("bessel argument must stay positive".into()));
    }
    let mut t_max = 1.0f64;
    for _ in 0..60 {
        t_max = ((800.0 + growth * t_max) / y_min).max(1.0).acosh().max(1.0);
    }
    let nu_max = ps.iter().map(|p| (p * nu_scale).abs()).fold(0.0, f64::max);
    let mut steps = ((t_max * (nu_max + 1.0)) / 2.0).ceil() as usize;
    let mut prev: Option<Mat<f64>> = None;
    for _ in 0..8 {
        let h = t_max / steps as f64;
        let nodes = steps + 1;
        let e = Mat::from_fn(xs.len(), nodes, |i, k| {
            let t = k as f64 * h;
            let w = if k == 0 || k == steps { 0.5 * h } else { h };
            w * g(xs[i], t.cosh())
        });
        let c = Mat::from_fn(nodes, ps.len(), |k, j| (ps[j] * nu_scale * k as f64 * h).cos());
        let mut out = Mat::<f64>::zeros(xs.len(), ps.len());
        matmul(out.as_mut(), Accum::Replace, e.as_ref(), c.as_ref(), 1.0, Par::rayon(0));
        if let Some(p) = &prev {
            let mut diff = 0.0f64;
            let mut peak = 0.0f64;
            for j in 0..ps.len() {
                for i in 0..xs.len() {
                    diff = diff.max((out[(i, j)] - p[(i, j)]).abs());
                    peak = peak.max(out[(i, j)].abs());
                }
            }
            if diff <= 1e-10 * peak {
                return SymbolField::sample_real(grid, |x, p| {
                    let i = ((x - grid.x_min()) / grid.dx()).round() as usize;
                    let j = (p / grid.dp() + (grid.n() / 2) as f64).round() as usize;
                    out[(i, j)]
                });
            }
        }
        prev = Some(out);
        steps *= 2;
    }
    Err(Error::NoConvergence("Bessel field quadrature".into()))
}

pub fn morse_energy(model: &MorseModel, n: usize) -> Result<f64> {
    model.energy(n, 1.0)
}

pub fn morse_p0(model: &MorseModel, grid: PhaseGrid) -> Result<NormalizedField> {
    model.ground_wigner(grid)
}

pub fn morse_p1(model: &MorseModel, grid: PhaseGrid) -> Result<NormalizedField> {
    model.first_excited_wigner(grid)
}
