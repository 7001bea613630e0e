//! Supersymmetric factorization and the shape-invariance ladder for Wigner functions.
//!
//! With `2m = 1` a superpotential `W(x; a)` defines the partner potentials
//! `V-+ = W^2 -+ hbar W'` and the ladder symbols `A = ip + W`, `A^+ = conj(A)`.
//! A shape-invariant model maps the parameter `a -> f(a)` so that
//! `V+(x; a) = V-(x; f(a)) + R(a)`. The excited Wigner functions then follow from the
//! ground state at a shifted parameter:
//!
//! ```text
//! P_n(a) = A^+(a) * P_{n-1}(f(a)) * A(a) / E_n(a)
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{PhaseGrid, SymbolField};
use crate::star::{kernel_star, BOUNDARY_LIMIT};
use crate::weyl::{kernel_to_symbol, wigner_from_wavefunction, Wavefunction};

/// Each rung is projected onto the modes above this fraction of its peak; products with
/// `A` would otherwise amplify roundoff in the unused modes from one rung to the next.
const SUPPORT_FLOOR: f64 = 1e-12;

/// Function of position and the shape parameter.
pub type ParamFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
/// Map on the shape parameter.
pub type ParamMap = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// `W(x; a)` with its derivative in `x`.
#[derive(Clone)]
pub struct Superpotential {
    w: ParamFn,
    w_prime: ParamFn,
    pub param_names: Vec<String>,
}

impl fmt::Debug for Superpotential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Superpotential").field("param_names", &self.param_names).finish()
    }
}

impl Superpotential {
    pub fn new<W, D>(w: W, w_prime: D, param_names: &[&str]) -> Self
    where
        W: Fn(f64, f64) -> f64 + Send + Sync + 'static,
        D: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            w: Arc::new(w),
            w_prime: Arc::new(w_prime),
            param_names: param_names.iter().map(|s| s.to_string()).collect(),
        }
    }

    pub fn w(&self, x: f64, a: f64) -> f64 {
        (self.w)(x, a)
    }

    pub fn w_prime(&self, x: f64, a: f64) -> f64 {
        (self.w_prime)(x, a)
    }

    /// Largest relative gap between `W'` and a centered difference of `W` over `xs`.
    pub fn derivative_defect(&self, xs: &[f64], a: f64) -> f64 {
        let h = 1e-5;
        xs.iter()
            .map(|&x| {
                let fd = (self.w(x + h, a) - self.w(x - h, a)) / (2.0 * h);
                let d = self.w_prime(x, a);
                (fd - d).abs() / d.abs().max(1.0)
            })
            .fold(0.0, f64::max)
    }
}

/// A superpotential together with its parameter orbit and energy bookkeeping.
#[derive(Clone)]
pub struct ShapeInvariantModel {
    pub name: String,
    pub sp: Superpotential,
    pub hbar: f64,
    pub a0: f64,
    pub n_bound: usize,
    f: ParamMap,
    remainder: ParamMap,
    domain: Arc<dyn Fn(f64) -> bool + Send + Sync>,
}

impl fmt::Debug for ShapeInvariantModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ShapeInvariantModel")
            .field("name", &self.name)
            .field("hbar", &self.hbar)
            .field("a0", &self.a0)
            .field("n_bound", &self.n_bound)
            .finish()
    }
}

/// Which partner a Wigner function is moved to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// `P+ = A * P- * A^+ / E`
    Down,
    /// `P- = A^+ * P+ * A / E`
    Up,
}

fn check_hbar(hbar: f64) -> Result<()> {
    if !(hbar > 0.0 && hbar.is_finite()) {
        return Err(Error::Domain(format!("hbar = {hbar}")));
    }
    Ok(())
}

impl ShapeInvariantModel {
    /// Oscillator `W = (omega / 2) x`; the parameter never moves and each rung costs `hbar omega`.
    pub fn sho(omega: f64, hbar: f64) -> Result<Self> {
        check_hbar(hbar)?;
        if !(omega > 0.0) {
            return Err(Error::Domain(format!("omega = {omega} must be positive")));
        }
        let half = omega / 2.0;
        Ok(Self {
            name: "sho".into(),
            sp: Superpotential::new(move |x, _| half * x, move |_, _| half, &["omega"]),
            hbar,
            a0: half,
            n_bound: crate::special::MAX_LAGUERRE,
            f: Arc::new(|a| a),
            remainder: Arc::new(move |_| hbar * omega),
            domain: Arc::new(|a| a > 0.0),
        })
    }

    /// Morse `W = a - b exp(-s x)` with `f(a) = a - hbar s` and `g(a) = -a^2`.
    pub fn morse(a: f64, b: f64, s: f64, hbar: f64) -> Result<Self> {
        check_hbar(hbar)?;
        let m = crate::models::MorseModel::new(a, b, s)?;
        let g = |a: f64| -a * a;
        let step = hbar * s;
        Ok(Self {
            name: "morse".into(),
            sp: Superpotential::new(
                move |x, a| a - b * (-s * x).exp(),
                move |x, _| b * s * (-s * x).exp(),
                &["a", "b", "s"],
            ),
            hbar,
            a0: a,
            n_bound: m.n_bound(hbar),
            f: Arc::new(move |a| a - step),
            remainder: Arc::new(move |a| g(a - step) - g(a)),
            domain: Arc::new(|a| a > 0.0),
        })
    }

    /// Model from a superpotential and a translation `f(a) = a - step`.
    ///
    /// The remainder `R(a) = V+(0; a) - V-(0; f(a))` is read off at the origin; use
    /// [`shape_invariance_residual`] to confirm it is constant in `x`.
    pub fn translational(
        name: &str,
        sp: Superpotential,
        a0: f64,
        step: f64,
        n_bound: usize,
        hbar: f64,
    ) -> Result<Self> {
        check_hbar(hbar)?;
        let sp2 = sp.clone();
        let remainder = move |a: f64| {
            let w = sp2.w(0.0, a);
            let b = a - step;
            let wb = sp2.w(0.0, b);
            (w * w + hbar * sp2.w_prime(0.0, a)) - (wb * wb - hbar * sp2.w_prime(0.0, b))
        };
        Ok(Self {
            name: name.into(),
            sp,
            hbar,
            a0,
            n_bound,
            f: Arc::new(move |a| a - step),
            remainder: Arc::new(remainder),
            domain: Arc::new(|a| a.is_finite()),
        })
    }

    /// Builds a registered model from named parameters; missing ones take defaults.
    pub fn from_registry(name: &str, params: &BTreeMap<String, f64>, hbar: f64) -> Result<Self> {
        let schema = registry()
            .iter()
            .find(|s| s.name == name)
            .ok_or_else(|| Error::Unsupported(format!("unknown model {name:?}")))?;
        for k in params.keys() {
            if !schema.params.iter().any(|(p, _)| p == k) {
                return Err(Error::Unsupported(format!("model {name} has no parameter {k:?}")));
            }
        }
        let get = |k: &str| {
            params
                .get(k)
                .copied()
                .unwrap_or_else(|| schema.params.iter().find(|(p, _)| *p == k).unwrap().1)
        };
        match name {
            "sho" => Self::sho(get("omega"), hbar),
            "morse" => Self::morse(get("a"), get("b"), get("s"), hbar),
            _ => unreachable!(),
        }
    }

    pub fn f(&self, a: f64) -> f64 {
        (self.f)(a)
    }

    /// `R(a) = g(f(a)) - g(a)`.
    pub fn remainder(&self, a: f64) -> f64 {
        (self.remainder)(a)
    }

    pub fn in_domain(&self, a: f64) -> bool {
        (self.domain)(a)
    }

    fn check_domain(&self, a: f64) -> Result<()> {
        if !self.in_domain(a) {
            return Err(Error::Domain(format!("parameter {a} outside the domain of {}", self.name)));
        }
        Ok(())
    }

    /// `a_n = f^n(a0)`.
    pub fn orbit(&self, n: usize) -> f64 {
        (0..n).fold(self.a0, |a, _| self.f(a))
    }

    /// Energy of level `n` of `H-` at parameter `a`: `sum_{k<n} R(f^k(a))`.
    pub fn energy_at(&self, a: f64, n: usize) -> f64 {
        let mut e = 0.0;
        let mut ak = a;
        for _ in 0..n {
            e += self.remainder(ak);
            ak = self.f(ak);
        }
        e
    }

    pub fn v_minus(&self, x: f64, a: f64) -> f64 {
        let w = self.sp.w(x, a);
        w * w - self.hbar * self.sp.w_prime(x, a)
    }

    pub fn v_plus(&self, x: f64, a: f64) -> f64 {
        let w = self.sp.w(x, a);
        w * w + self.hbar * self.sp.w_prime(x, a)
    }

    /// Symbol `p^2 + V-(x; a)`.
    pub fn h_minus(&self, a: f64, grid: PhaseGrid) -> Result<SymbolField> {
        SymbolField::sample_real(grid, |x, p| p * p + self.v_minus(x, a))
    }

    /// Symbol `p^2 + V+(x; a)`.
    pub fn h_plus(&self, a: f64, grid: PhaseGrid) -> Result<SymbolField> {
        SymbolField::sample_real(grid, |x, p| p * p + self.v_plus(x, a))
    }
}

/// Parameter schema of a registered model.
#[derive(Debug, Clone, Copy)]
pub struct ModelSchema {
    pub name: &'static str,
    pub params: &'static [(&'static str, f64)],
}

/// Built-in models and their default parameters.
pub fn registry() -> &'static [ModelSchema] {
    const MODELS: &[ModelSchema] = &[
        ModelSchema { name: "sho", params: &[("omega", 2.0)] },
        ModelSchema { name: "morse", params: &[("a", 5.0), ("b", 1.0), ("s", 1.0)] },
    ];
    MODELS
}

/// `(V-, V+)` at parameter `a`.
pub fn partner_potentials(
    model: &ShapeInvariantModel,
    a: f64,
) -> Result<(impl Fn(f64) -> f64 + '_, impl Fn(f64) -> f64 + '_)> {
    model.check_domain(a)?;
    Ok((move |x| model.v_minus(x, a), move |x| model.v_plus(x, a)))
}

/// Ladder symbols `A = ip + W(x; a)` and `A^+ = -ip + W(x; a)`.
pub fn ladder_symbols(
    model: &ShapeInvariantModel,
    a: f64,
    grid: PhaseGrid,
) -> Result<(SymbolField, SymbolField)> {
    model.check_domain(a)?;
    let a_sym = SymbolField::sample(grid, |x, p| Complex64::new(model.sp.w(x, a), p))?;
    let a_dag = a_sym.conj();
    Ok((a_sym, a_dag))
}

/// `E_n` of `H-(a0)`.
pub fn si_energy(model: &ShapeInvariantModel, n: usize) -> Result<f64> {
    if n > model.n_bound {
        return Err(Error::OutOfRange { index: n, limit: model.n_bound });
    }
    Ok(model.energy_at(model.a0, n))
}

/// Largest `|V+(x; a) - V-(x; f(a)) - R(a)|` along the orbit `a0 .. a_{n_bound}`,
/// relative to the largest `|V+|` seen.
pub fn shape_invariance_residual(model: &ShapeInvariantModel, xs: &[f64]) -> f64 {
    let mut worst = 0.0f64;
    let mut scale = 0.0f64;
    let mut a = model.a0;
    for _ in 0..=model.n_bound.min(64) {
        let b = model.f(a);
        let r = model.remainder(a);
        for &x in xs {
            let vp = model.v_plus(x, a);
            scale = scale.max(vp.abs());
            worst = worst.max((vp - model.v_minus(x, b) - r).abs());
        }
        a = b;
    }
    worst / scale.max(1.0)
}

/// `psi_0 ~ exp(-(1/hbar) integral W)`, integrating `W` cell by cell with Gauss-Legendre.
pub fn ground_state_wavefunction(
    model: &ShapeInvariantModel,
    a: f64,
    grid: PhaseGrid,
) -> Result<Wavefunction> {
    model.check_domain(a)?;
    let xs = grid.xs();
    let h = grid.dx();
    // 8-point Gauss-Legendre on each cell; W is evaluated off the lattice
    let mut phi = vec![0.0; xs.len()];
    for i in 1..xs.len() {
        let mid = xs[i - 1] + 0.5 * h;
        let cell: f64 = GAUSS8
            .iter()
            .map(|(t, wt)| wt * (model.sp.w(mid + 0.5 * h * t, a) + model.sp.w(mid - 0.5 * h * t, a)))
            .sum();
        phi[i] = phi[i - 1] + 0.5 * h * cell;
    }
    let expo: Vec<f64> = phi.iter().map(|v| -v / grid.hbar()).collect();
    let top = expo.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !top.is_finite() {
        return Err(Error::BrokenSusy(format!("superpotential not finite for a = {a}")));
    }
    let psi = Wavefunction::new(grid, expo.iter().map(|e| Complex64::new((e - top).exp(), 0.0)).collect());
    let edge = psi.boundary_ratio();
    if edge > 1e-8 {
        return Err(Error::BrokenSusy(format!(
            "ground state not normalizable on the grid (edge ratio {edge:.3e})"
        )));
    }
    psi.normalized()
}

/// Positive nodes and weights of the 8-point Gauss-Legendre rule on `[-1, 1]`.
const GAUSS8: [(f64, f64); 4] = [
    (0.183_434_642_495_649_8, 0.362_683_783_378_362),
    (0.525_532_409_916_329, 0.313_706_645_877_887_3),
    (0.796_666_477_413_626_7, 0.222_381_034_453_374_5),
    (0.960_289_856_497_536_3, 0.101_228_536_290_376_3),
];

/// Wigner function of the SUSY ground state at parameter `a`.
pub fn ground_wigner(model: &ShapeInvariantModel, a: f64, grid: PhaseGrid) -> Result<SymbolField> {
    wigner_from_wavefunction(&ground_state_wavefunction(model, a, grid)?)
}

/// `sup |A * P| / sup |P|` over the interior window.
pub fn annihilation_residual(model: &ShapeInvariantModel, a: f64, p: &SymbolField) -> Result<f64> {
    let (a_sym, _) = ladder_symbols(model, a, *p.grid())?;
    let ap = kernel_star(&a_sym, p)?;
    Ok(ap.sup_norm_interior() / p.sup_norm())
}

fn sandwich(left: &SymbolField, p: &SymbolField, right: &SymbolField, e: f64) -> Result<SymbolField> {
    if !(e > 0.0) {
        return Err(Error::Domain(format!("ladder energy {e} must be positive")));
    }
    let kernel = left.kernel().compose(&p.kernel())?.compose(&right.kernel())?.trim(SUPPORT_FLOOR);
    let out = kernel_to_symbol(&kernel);
    let total = out.integrate2d().re;
    if !(total.is_finite() && total != 0.0) {
        return Err(Error::NoConvergence(format!("ladder output integrates to {total}")));
    }
    let mass = out.boundary_mass() / out.sup_norm();
    if mass > BOUNDARY_LIMIT {
        return Err(Error::BoundaryMass { mass, limit: BOUNDARY_LIMIT });
    }
    let kernel = Arc::new(kernel.scale(Complex64::new(1.0 / total, 0.0)));
    Ok(out.scale_real(1.0 / total).into_real(1e-6)?.real_part().with_kernel(kernel))
}

/// One rung: `A^+(a) * P_prev * A(a) / E_n(a)`, renormalized to integrate to one.
///
/// `p_prev` is level `n - 1` at parameter `f(a)`.
pub fn ladder_step(
    p_prev: &SymbolField,
    model: &ShapeInvariantModel,
    a: f64,
    n: usize,
) -> Result<SymbolField> {
    let (a_sym, a_dag) = ladder_symbols(model, a, *p_prev.grid())?;
    sandwich(&a_dag, p_prev, &a_sym, model.energy_at(a, n))
}

/// Levels `0..=n_max` of `H-(a0)`, each grown from the ground state at `a_n`.
pub fn build_wigner_sequence(
    model: &ShapeInvariantModel,
    grid: PhaseGrid,
    n_max: usize,
) -> Result<Vec<SymbolField>> {
    if n_max > model.n_bound {
        return Err(Error::OutOfRange { index: n_max, limit: model.n_bound });
    }
    (0..=n_max)
        .map(|n| {
            let mut p = ground_wigner(model, model.orbit(n), grid)?;
            for k in (0..n).rev() {
                p = ladder_step(&p, model, model.orbit(k), n - k)?;
            }
            Ok(p)
        })
        .collect()
}

/// Moves a Wigner function between the partners `H-(a)` and `H+(a)`.
///
/// `energy` is the level being mapped: `E_{n+1}-` going down, `E_n+` going up (equal).
pub fn partner_wigner_map(
    p: &SymbolField,
    model: &ShapeInvariantModel,
    a: f64,
    direction: Direction,
    energy: f64,
) -> Result<SymbolField> {
    let (a_sym, a_dag) = ladder_symbols(model, a, *p.grid())?;
    match direction {
        Direction::Down => sandwich(&a_sym, p, &a_dag, energy),
        Direction::Up => sandwich(&a_dag, p, &a_sym, energy),
    }
}
