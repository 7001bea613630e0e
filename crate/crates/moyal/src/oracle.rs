//! Independent spectra by dense diagonalization of `p^2 + V(x)` on the position lattice.
//!
//! No star products are involved: the Hamiltonian is the periodic spectral operator
//! (multiplication by `p^2` in momentum space plus the diagonal potential), the same
//! discretization the kernel backend uses for separable symbols.

use faer::{Mat, Side};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{PhaseGrid, SymbolField};
use crate::weyl::{separable_kernel, wigner_from_wavefunction, KernelMatrix, Wavefunction};

/// Lowest eigenpairs of a Hamiltonian kernel.
#[derive(Debug, Clone)]
pub struct SpectrumResult {
    pub energies: Vec<f64>,
    pub wavefunctions: Vec<Wavefunction>,
    /// `||H psi - E psi||` per state.
    pub residuals: Vec<f64>,
    /// Largest eigenvalue magnitude, the scale residuals are judged against.
    pub norm_estimate: f64,
}

/// Kernel of `p^2 + V(x)`, symmetrized.
pub fn discretize_hamiltonian<V: Fn(f64) -> f64>(v: V, grid: PhaseGrid) -> Result<KernelMatrix> {
    let f: Vec<Complex64> = grid
        .xs()
        .into_iter()
        .enumerate()
        .map(|(i, x)| {
            let y = v(x);
            if !y.is_finite() {
                return Err(Error::NonFinite { i, j: 0, x, p: 0.0, value: y.to_string() });
            }
            Ok(Complex64::new(y, 0.0))
        })
        .collect::<Result<_>>()?;
    let g: Vec<Complex64> = grid.ps().into_iter().map(|p| Complex64::new(p * p, 0.0)).collect();
    let k = separable_kernel(grid, &f, &g);
    Ok(k.axpby(Complex64::new(0.5, 0.0), &k.adjoint(), Complex64::new(0.5, 0.0)))
}

/// The `k` lowest eigenpairs of the operator whose kernel is `kernel`.
///
/// Eigenvalues are those of the operator `dx K`, so the kernel `I / dx` of the identity
/// has eigenvalue 1. `k` is limited to `n / 4`.
pub fn eigensolve_lowest(kernel: &KernelMatrix, k: usize) -> Result<SpectrumResult> {
    let grid = *kernel.grid();
    let n = grid.n();
    if k == 0 || k > n / 4 {
        return Err(Error::OutOfRange { index: k, limit: n / 4 });
    }
    let defect = kernel.hermitian_defect();
    if defect > 1e-10 * kernel.max_abs() {
        return Err(Error::NotHermitian(defect));
    }
    let dx = grid.dx();
    let m = kernel.matrix();
    let real = (0..n).all(|b| (0..n).all(|a| m[(a, b)].im == 0.0));
    let eig_err = |e| Error::NoConvergence(format!("eigensolver: {e:?}"));
    let (values, vectors): (Vec<f64>, Vec<Vec<Complex64>>) = if real {
        let r = Mat::<f64>::from_fn(n, n, |a, b| m[(a, b)].re * dx);
        let e = r.self_adjoint_eigen(Side::Lower).map_err(eig_err)?;
        let s = e.S().column_vector();
        let u = e.U();
        (
            (0..n).map(|i| s[i]).collect(),
            (0..k).map(|c| (0..n).map(|r| Complex64::new(u[(r, c)], 0.0)).collect()).collect(),
        )
    } else {
        let c = Mat::<Complex64>::from_fn(n, n, |a, b| m[(a, b)] * dx);
        let e = c.self_adjoint_eigen(Side::Lower).map_err(eig_err)?;
        let s = e.S().column_vector();
        let u = e.U();
        (
            (0..n).map(|i| s[i].re).collect(),
            (0..k).map(|c| (0..n).map(|r| u[(r, c)]).collect()).collect(),
        )
    };
    let norm_estimate = values.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let scale = 1.0 / dx.sqrt();
    let mut wavefunctions = Vec::with_capacity(k);
    let mut residuals = Vec::with_capacity(k);
    for (vec, &e) in vectors.iter().zip(&values) {
        // phase convention: the largest component is real and positive
        let top = vec.iter().copied().fold(Complex64::new(0.0, 0.0), |a, b| if b.norm() > a.norm() { b } else { a });
        let phase = top.conj() / top.norm();
        let psi = Wavefunction::new(grid, vec.iter().map(|v| v * phase * scale).collect());
        let hpsi = kernel.apply(&psi)?;
        let r = hpsi
            .values()
            .iter()
            .zip(psi.values())
            .map(|(h, p)| (h - p * e).norm_sqr())
            .sum::<f64>()
            .sqrt()
            * dx.sqrt();
        residuals.push(r);
        wavefunctions.push(psi);
    }
    Ok(SpectrumResult { energies: values[..k].to_vec(), wavefunctions, residuals, norm_estimate })
}

/// Wigner function of eigenstate `n`, signed so that it integrates to `+1`.
pub fn oracle_wigner(result: &SpectrumResult, n: usize) -> Result<SymbolField> {
    let psi = result
        .wavefunctions
        .get(n)
        .ok_or(Error::OutOfRange { index: n, limit: result.wavefunctions.len().saturating_sub(1) })?;
    let p = wigner_from_wavefunction(psi)?;
    if p.integrate2d().re < 0.0 {
        Ok(p.scale_real(-1.0))
    } else {
        Ok(p)
    }
}
