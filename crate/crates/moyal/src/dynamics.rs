//! Star-eigenvalue residuals and time evolution `i hbar dP/dt = [H, P]`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::SymbolField;
use crate::star::{moyal_bracket, star, StarMethod};

/// `sup |H * P - E P|` over the interior window, divided by `sup |P|`.
pub fn star_eigen_residual(h: &SymbolField, p: &SymbolField, e: f64, method: StarMethod) -> Result<f64> {
    let hp = star(h, p, method)?;
    let r = hp.axpby(Complex64::new(1.0, 0.0), p, Complex64::new(-e, 0.0))?;
    Ok(r.sup_norm_interior() / p.sup_norm().max(f64::MIN_POSITIVE))
}

/// Largest `dt (max H - min H) / hbar` accepted by [`evolve_step`].
pub const STABILITY_LIMIT: f64 = 0.5;

/// `dt (max Re H - min Re H) / hbar`, the quantity the stability guard bounds.
pub fn stability_number(h: &SymbolField, dt: f64) -> f64 {
    let (lo, hi) = h
        .values()
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v.re), hi.max(v.re)));
    dt.abs() * (hi - lo) / h.grid().hbar()
}

fn rhs(h: &SymbolField, p: &SymbolField, method: StarMethod) -> Result<SymbolField> {
    Ok(moyal_bracket(h, p, method)?.scale(Complex64::new(0.0, -1.0 / h.grid().hbar())))
}

/// One classical RK4 step of `dP/dt = (1 / i hbar) [H, P]`.
pub fn evolve_step(p: &SymbolField, h: &SymbolField, dt: f64, method: StarMethod) -> Result<SymbolField> {
    if p.grid() != h.grid() {
        return Err(Error::GridMismatch);
    }
    let nu = stability_number(h, dt);
    if !(nu < STABILITY_LIMIT) {
        return Err(Error::Unstable(nu));
    }
    let one = Complex64::new(1.0, 0.0);
    let c = |s: f64| Complex64::new(s, 0.0);
    let k1 = rhs(h, p, method)?;
    let k2 = rhs(h, &p.axpby(one, &k1, c(dt / 2.0))?, method)?;
    let k3 = rhs(h, &p.axpby(one, &k2, c(dt / 2.0))?, method)?;
    let k4 = rhs(h, &p.axpby(one, &k3, c(dt))?, method)?;
    let incr = k1.axpby(one, &k2, c(2.0))?.axpby(one, &k3.axpby(one, &k4, c(0.5))?, c(2.0))?;
    let out = p.axpby(one, &incr, c(dt / 6.0))?;
    if !p.is_real() {
        return Ok(out);
    }
    let kernel = out.cached_kernel().cloned();
    let real = out.into_real(1e-10)?.real_part();
    Ok(match kernel {
        Some(k) => real.with_kernel(k),
        None => real,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::PhaseGrid;
    use crate::models::ShoModel;

    #[test]
    fn sho_residuals() {
        // the kernel of a sampled state is cut at |x - x'| = L/2, so P5 needs L = 32
        let g = PhaseGrid::new(256, -16.0, 16.0, 1.0).unwrap();
        let m = ShoModel::new(1.0).unwrap();
        let h = m.hamiltonian(g).unwrap();
        let p5 = m.wigner(5, g).unwrap();
        assert!(star_eigen_residual(&h, &p5, 11.0, StarMethod::Kernel).unwrap() < 1e-6);
        let off = star_eigen_residual(&h, &p5, 12.0, StarMethod::Kernel).unwrap();
        assert!(off >= 1.0 * (1.0 - 1e-6));
    }

    #[test]
    fn stationary_and_guarded() {
        let g = PhaseGrid::new(64, -8.0, 8.0, 1.0).unwrap();
        let m = ShoModel::new(1.0).unwrap();
        let h = m.hamiltonian(g).unwrap();
        let p1 = m.wigner(1, g).unwrap();
        let mut p = p1.clone();
        for _ in 0..10 {
            p = evolve_step(&p, &h, 1e-3, StarMethod::Kernel).unwrap();
        }
        assert!(p.distance(&p1).unwrap() < 1e-7);
        assert!((p.integrate2d().re - p1.integrate2d().re).abs() < 1e-8);
        assert!(matches!(evolve_step(&p1, &h, 1.0, StarMethod::Kernel), Err(Error::Unstable(_))));
        let zero = SymbolField::zeros(g);
        let same = evolve_step(&p1, &zero, 0.1, StarMethod::Kernel).unwrap();
        assert!(same.distance(&p1).unwrap() == 0.0);
    }
}
