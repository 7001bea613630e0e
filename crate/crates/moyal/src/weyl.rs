//! Wavefunctions, operator kernels, and the Weyl correspondence between kernels and
//! phase-space symbols.
//!
//! Kernels follow the continuum normalization: an operator acts as
//! `(K psi)(x_a) = sum_b K(x_a, x_b) psi(x_b) dx`, so the identity is `I / dx` and
//! composition carries a factor `dx`. The Weyl symbol of a kernel is
//!
//! ```text
//! A(x, p) = integral ds  exp(-i p s / hbar) K(x + s/2, x - s/2)
//! ```
//!
//! With `s` on the lattice `m dx`, odd `m` reaches half-integer positions. Kernels that
//! vanish at the edges of the box are interpolated there spectrally, which is exact for
//! band-limited states. Other kernels use 16-point Lagrange interpolation along the
//! anti-diagonal, which keeps polynomial symbols exact.

use std::f64::consts::PI;
use std::sync::{Arc, OnceLock};

use faer::linalg::matmul::matmul;
use faer::{Accum, Mat, Par};
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::grid::{PhaseGrid, SymbolField};

const STENCIL: usize = 16;

/// Kernels whose edge rows and columns are below this fraction of the largest entry are
/// treated as localized and interpolated spectrally.
const LOCALIZED: f64 = 1e-8;

/// Position-representation kernel `K(x_i, x_j)` on the lattice of a grid.
#[derive(Debug, Clone)]
pub struct KernelMatrix {
    grid: PhaseGrid,
    mat: Mat<Complex64>,
}

impl KernelMatrix {
    pub fn new(grid: PhaseGrid, mat: Mat<Complex64>) -> Result<Self> {
        if mat.nrows() != grid.n() || mat.ncols() != grid.n() {
            return Err(Error::Format(format!(
                "kernel is {}x{}, grid has {} points",
                mat.nrows(),
                mat.ncols(),
                grid.n()
            )));
        }
        Ok(Self { grid, mat })
    }

    pub fn from_fn<F>(grid: PhaseGrid, f: F) -> Self
    where
        F: Fn(usize, usize) -> Complex64,
    {
        let n = grid.n();
        Self { grid, mat: Mat::from_fn(n, n, f) }
    }

    /// Kernel of the identity operator, `I / dx`.
    pub fn identity(grid: PhaseGrid) -> Self {
        let d = Complex64::new(1.0 / grid.dx(), 0.0);
        Self::from_fn(grid, |a, b| if a == b { d } else { Complex64::new(0.0, 0.0) })
    }

    /// `|psi><phi|`.
    pub fn outer(psi: &Wavefunction, phi: &Wavefunction) -> Result<Self> {
        if psi.grid != phi.grid {
            return Err(Error::GridMismatch);
        }
        Ok(Self::from_fn(psi.grid, |a, b| psi.values[a] * phi.values[b].conj()))
    }

    pub fn grid(&self) -> &PhaseGrid {
        &self.grid
    }

    pub fn matrix(&self) -> &Mat<Complex64> {
        &self.mat
    }

    pub fn get(&self, a: usize, b: usize) -> Complex64 {
        self.mat[(a, b)]
    }

    /// Operator product, `(A B)(a, b) = sum_c A(a, c) B(c, b) dx`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let n = self.grid.n();
        let mut out = Mat::<Complex64>::zeros(n, n);
        matmul(
            out.as_mut(),
            Accum::Replace,
            self.mat.as_ref(),
            other.mat.as_ref(),
            Complex64::new(self.grid.dx(), 0.0),
            Par::rayon(0),
        );
        Ok(Self { grid: self.grid, mat: out })
    }

    /// `A B - B A`.
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        let ab = self.compose(other)?;
        let ba = other.compose(self)?;
        Ok(ab.axpby(Complex64::new(1.0, 0.0), &ba, Complex64::new(-1.0, 0.0)))
    }

    pub fn axpby(&self, alpha: Complex64, other: &Self, beta: Complex64) -> Self {
        let n = self.grid.n();
        Self {
            grid: self.grid,
            mat: Mat::from_fn(n, n, |a, b| alpha * self.mat[(a, b)] + beta * other.mat[(a, b)]),
        }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let n = self.grid.n();
        Self { grid: self.grid, mat: Mat::from_fn(n, n, |a, b| c * self.mat[(a, b)]) }
    }

    pub fn adjoint(&self) -> Self {
        let n = self.grid.n();
        Self { grid: self.grid, mat: Mat::from_fn(n, n, |a, b| self.mat[(b, a)].conj()) }
    }

    pub fn max_abs(&self) -> f64 {
        let n = self.grid.n();
        let mut m = 0.0f64;
        for b in 0..n {
            for a in 0..n {
                m = m.max(self.mat[(a, b)].norm());
            }
        }
        m
    }

    /// Largest entry on the first and last rows and columns.
    pub fn edge_max(&self) -> f64 {
        let n = self.grid.n();
        let mut m = 0.0f64;
        for k in 0..n {
            for v in [self.mat[(0, k)], self.mat[(n - 1, k)], self.mat[(k, 0)], self.mat[(k, n - 1)]] {
                m = m.max(v.norm());
            }
        }
        m
    }

    /// `max |K - K^dagger|`.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.grid.n();
        let mut m = 0.0f64;
        for b in 0..n {
            for a in 0..=b {
                m = m.max((self.mat[(a, b)] - self.mat[(b, a)].conj()).norm());
            }
        }
        m
    }

    /// Projects onto the positions and lattice momenta where the operator lives.
    ///
    /// A mode (row and column) is dropped when its largest entry is below `floor` times
    /// the largest entry overall, first in the position basis and then in the momentum
    /// basis. Products with `x` or `p` amplify such roundoff-level modes, so repeated
    /// products stay clean only after this projection.
    pub fn trim(&self, floor: f64) -> Self {
        let n = self.grid.n();
        let zero = Complex64::new(0.0, 0.0);
        let support = |m: &Mat<Complex64>| -> Vec<bool> {
            let mut line = vec![0.0f64; n];
            for b in 0..n {
                for a in 0..n {
                    let v = m[(a, b)].norm();
                    line[a] = line[a].max(v);
                    line[b] = line[b].max(v);
                }
            }
            let top = line.iter().copied().fold(0.0, f64::max);
            line.iter().map(|v| *v > floor * top).collect()
        };
        let keep_x = support(&self.mat);
        let pos = Mat::from_fn(n, n, |a, b| if keep_x[a] && keep_x[b] { self.mat[(a, b)] } else { zero });

        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        // K~ = F K F^dagger: columns forward, then rows with the conjugate transform
        let cols: Vec<Vec<Complex64>> = (0..n)
            .into_par_iter()
            .map(|b| {
                let mut line: Vec<Complex64> = (0..n).map(|a| pos[(a, b)]).collect();
                fwd.process(&mut line);
                line
            })
            .collect();
        let mom = Mat::from_fn(n, n, |k, b| cols[b][k]);
        let rows: Vec<Vec<Complex64>> = (0..n)
            .into_par_iter()
            .map(|k| {
                let mut line: Vec<Complex64> = (0..n).map(|b| mom[(k, b)]).collect();
                inv.process(&mut line);
                line
            })
            .collect();
        let mom = Mat::from_fn(n, n, |k, l| rows[k][l]);
        let keep_p = support(&mom);
        if keep_p.iter().all(|k| *k) {
            return Self { grid: self.grid, mat: pos };
        }
        let scale = 1.0 / (n * n) as f64;
        let rows: Vec<Vec<Complex64>> = (0..n)
            .into_par_iter()
            .map(|k| {
                let mut line: Vec<Complex64> =
                    (0..n).map(|l| if keep_p[k] && keep_p[l] { mom[(k, l)] } else { zero }).collect();
                fwd.process(&mut line);
                line
            })
            .collect();
        let back = Mat::from_fn(n, n, |k, b| rows[k][b]);
        let cols: Vec<Vec<Complex64>> = (0..n)
            .into_par_iter()
            .map(|b| {
                let mut line: Vec<Complex64> = (0..n).map(|k| back[(k, b)]).collect();
                inv.process(&mut line);
                line
            })
            .collect();
        Self { grid: self.grid, mat: Mat::from_fn(n, n, |a, b| cols[b][a] * scale) }
    }

    /// Trace of the operator, `sum_a K(a, a) dx`.
    pub fn trace(&self) -> Complex64 {
        (0..self.grid.n()).map(|a| self.mat[(a, a)]).sum::<Complex64>() * self.grid.dx()
    }

    /// Applies the operator to a wavefunction.
    pub fn apply(&self, psi: &Wavefunction) -> Result<Wavefunction> {
        if self.grid != psi.grid {
            return Err(Error::GridMismatch);
        }
        let n = self.grid.n();
        let dx = self.grid.dx();
        let values = (0..n)
            .map(|a| (0..n).map(|b| self.mat[(a, b)] * psi.values[b]).sum::<Complex64>() * dx)
            .collect();
        Ok(Wavefunction::new(self.grid, values))
    }
}

/// Complex wavefunction on the position lattice of a grid.
#[derive(Debug, Clone)]
pub struct Wavefunction {
    grid: PhaseGrid,
    values: Vec<Complex64>,
}

impl Wavefunction {
    pub fn new(grid: PhaseGrid, values: Vec<Complex64>) -> Self {
        assert_eq!(values.len(), grid.n(), "wavefunction length must equal n_x");
        Self { grid, values }
    }

    pub fn from_fn<F: Fn(f64) -> Complex64>(grid: PhaseGrid, f: F) -> Self {
        Self::new(grid, grid.xs().into_iter().map(f).collect())
    }

    pub fn from_real_fn<F: Fn(f64) -> f64>(grid: PhaseGrid, f: F) -> Self {
        Self::from_fn(grid, |x| Complex64::new(f(x), 0.0))
    }

    pub fn grid(&self) -> &PhaseGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// `sum |psi|^2 dx`.
    pub fn norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.dx()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sq() - 1.0).abs() <= 1e-10
    }

    pub fn normalized(&self) -> Result<Self> {
        let n2 = self.norm_sq();
        if !(n2.is_finite() && n2 > 0.0) {
            return Err(Error::NotNormalized(n2));
        }
        let s = 1.0 / n2.sqrt();
        Ok(Self::new(self.grid, self.values.iter().map(|v| v * s).collect()))
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &Self) -> Complex64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a.conj() * b)
            .sum::<Complex64>()
            * self.grid.dx()
    }

    pub fn conj(&self) -> Self {
        Self::new(self.grid, self.values.iter().map(|v| v.conj()).collect())
    }

    /// Largest modulus at the two ends relative to the peak.
    pub fn boundary_ratio(&self) -> f64 {
        let peak = self.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let edge = self.values[0].norm().max(self.values[self.values.len() - 1].norm());
        edge / peak.max(f64::MIN_POSITIVE)
    }

    /// Momentum-space density `|psi~(p_j)|^2` on the grid's momentum axis.
    pub fn momentum_density(&self) -> Vec<f64> {
        let n = self.grid.n();
        let mut buf: Vec<Complex64> = self
            .values
            .iter()
            .enumerate()
            .map(|(i, v)| v * alternating(i as i64))
            .collect();
        FftPlanner::new().plan_fft_forward(n).process(&mut buf);
        let dx = self.grid.dx();
        let scale = dx * dx / (2.0 * PI * self.grid.hbar());
        buf.iter().map(|v| v.norm_sqr() * scale).collect()
    }
}

fn lagrange_table() -> &'static Vec<Vec<Vec<f64>>> {
    // table[m][k]: weights of an m-point stencil evaluated at position k + 1/2
    static TABLE: OnceLock<Vec<Vec<Vec<f64>>>> = OnceLock::new();
    TABLE.get_or_init(|| {
        (0..=STENCIL)
            .map(|m| {
                (0..m.saturating_sub(1))
                    .map(|k| {
                        let t = k as f64 + 0.5;
                        (0..m)
                            .map(|j| {
                                (0..m)
                                    .filter(|&l| l != j)
                                    .map(|l| (t - l as f64) / (j as f64 - l as f64))
                                    .product()
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect()
    })
}

/// Value halfway between samples `k` and `k + 1` of a sequence of length `len`.
fn half_point<F: Fn(usize) -> Complex64>(sample: F, len: usize, k: usize) -> Complex64 {
    let m = len.min(STENCIL);
    let start = (k + 1).saturating_sub(m / 2).min(len - m);
    let w = &lagrange_table()[m][k - start];
    w.iter().enumerate().map(|(j, wj)| sample(start + j) * wj).sum()
}

fn alternating(m: i64) -> f64 {
    if m.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Additive split `A(x, p) = f(x) + g(p)` when it holds to rounding.
fn additive_split(field: &SymbolField) -> Option<(Vec<Complex64>, Vec<Complex64>)> {
    let n = field.grid().n();
    let scale = field.sup_norm().max(f64::MIN_POSITIVE);
    let a00 = field.get(0, 0);
    for i in 0..n {
        let ai0 = field.get(i, 0);
        for j in 0..n {
            if (field.get(i, j) - ai0 - field.get(0, j) + a00).norm() > 1e-12 * scale {
                return None;
            }
        }
    }
    let f = (0..n).map(|i| field.get(i, 0) - a00).collect();
    let g = field.row(0).to_vec();
    Some((f, g))
}

/// Inverse momentum transform of one symbol row: `g(m) = (1 / (n dx)) sum_j A_j e^{i p_j m dx / hbar}`,
/// returned for `m = 0..n` (periodic in `m`).
fn row_to_offsets(row: &[Complex64], dx: f64, fft: &dyn rustfft::Fft<f64>) -> Vec<Complex64> {
    let n = row.len();
    let mut buf = row.to_vec();
    fft.process(&mut buf);
    let s = 1.0 / (n as f64 * dx);
    buf.iter().enumerate().map(|(m, v)| v * (s * alternating(m as i64))).collect()
}

/// Kernel of `f(x) + g(p)` from the values `f(x_i)` and `g(p_j)`: a diagonal `f / dx`
/// plus the circulant that multiplies by `g` in momentum space.
pub fn separable_kernel(grid: PhaseGrid, f: &[Complex64], g: &[Complex64]) -> KernelMatrix {
    let n = grid.n();
    let dx = grid.dx();
    let ifft = FftPlanner::new().plan_fft_inverse(n);
    let circ = row_to_offsets(g, dx, ifft.as_ref());
    KernelMatrix::from_fn(grid, |a, b| {
        let m = (a + n - b) % n;
        let d = if a == b { f[a] / dx } else { Complex64::new(0.0, 0.0) };
        circ[m] + d
    })
}

/// Kernel of a symbol, ignoring any kernel cached on the field.
///
/// Symbols of the form `f(x) + g(p)` map to a diagonal plus a circulant kernel, which is
/// the periodic spectral discretization of the operator. Other symbols map to kernels
/// supported on `|x - x'| <= L/2`; states whose kernel is wider than that are not
/// representable by their samples alone.
pub fn symbol_to_kernel_uncached(field: &SymbolField) -> KernelMatrix {
    let grid = *field.grid();
    let n = grid.n();
    let dx = grid.dx();
    let ifft = FftPlanner::new().plan_fft_inverse(n);

    if let Some((f, g)) = additive_split(field) {
        return separable_kernel(grid, &f, &g);
    }

    // columns on the half lattice when the symbol vanishes at both ends in x
    let edge = (0..n).map(|j| field.get(0, j).norm().max(field.get(n - 1, j).norm())).fold(0.0, f64::max);
    let fine: Option<Vec<Vec<Complex64>>> = (edge <= LOCALIZED * field.sup_norm()).then(|| {
        let half = HalfLattice::new(n);
        (0..n)
            .into_par_iter()
            .map(|j| half.apply(&(0..n).map(|i| field.get(i, j)).collect::<Vec<_>>()))
            .collect()
    });

    // rows of the symbol at integer and half-integer positions, r = 2u
    let rows: Vec<Vec<Complex64>> = (0..2 * n - 1)
        .into_par_iter()
        .map(|r| {
            let row: Vec<Complex64> = if r % 2 == 0 {
                field.row(r / 2).to_vec()
            } else if let Some(fine) = &fine {
                (0..n).map(|j| fine[j][r]).collect()
            } else {
                (0..n).map(|j| half_point(|i| field.get(i, j), n, r / 2)).collect()
            };
            row_to_offsets(&row, dx, ifft.as_ref())
        })
        .collect();

    let half = (n / 2) as i64;
    KernelMatrix::from_fn(grid, |a, b| {
        let m = a as i64 - b as i64;
        let w = match m.abs() {
            d if d < half => 1.0,
            d if d == half => 0.5,
            _ => return Complex64::new(0.0, 0.0),
        };
        rows[a + b][m.rem_euclid(n as i64) as usize] * w
    })
}

/// Kernel of a symbol: the cached kernel when the field carries one, otherwise reconstructed.
pub fn symbol_to_kernel(field: &SymbolField) -> Arc<KernelMatrix> {
    field.kernel()
}

/// Weyl symbol of a kernel; the result keeps the kernel attached.
pub fn kernel_to_symbol(kernel: &KernelMatrix) -> SymbolField {
    let grid = *kernel.grid();
    let n = grid.n();
    let dx = grid.dx();
    let fft = FftPlanner::new().plan_fft_forward(n);
    let fine = if kernel.edge_max() <= LOCALIZED * kernel.max_abs() {
        Some(HalfLattice::new(n).kernel(kernel))
    } else {
        None
    };
    let values: Vec<Complex64> = (0..n)
        .into_par_iter()
        .flat_map_iter(|u| {
            let mut fold = vec![Complex64::new(0.0, 0.0); n];
            let reach = 2 * u.min(n - 1 - u) as i64;
            for m in -reach..=reach {
                let c = if let Some(fine) = &fine {
                    let a = (2 * u as i64 + m) as usize;
                    let b = (2 * u as i64 - m) as usize;
                    fine[a * 2 * n + b]
                } else if m % 2 == 0 {
                    let h = m / 2;
                    kernel.get((u as i64 + h) as usize, (u as i64 - h) as usize)
                } else {
                    // anti-diagonal a - b = m, indexed by b
                    let lo = (-m).max(0) as usize;
                    let hi = (n as i64 - 1 - m.max(0)) as usize;
                    let k = (u as i64 - (m + 1) / 2) as usize - lo;
                    half_point(|t| kernel.get(((lo + t) as i64 + m) as usize, lo + t), hi - lo + 1, k)
                };
                fold[m.rem_euclid(n as i64) as usize] += c * alternating(m);
            }
            fft.process(&mut fold);
            fold.into_iter().map(move |v| v * dx)
        })
        .collect();
    let field = SymbolField::raw(grid, values);
    let field = if kernel.hermitian_defect() <= 1e-12 * kernel.max_abs() {
        field.real_part()
    } else {
        field
    };
    field.with_kernel(Arc::new(kernel.clone()))
}

/// Wigner function `P(x, p) = (1 / 2 pi hbar) integral ds e^{-i p s / hbar} psi(x + s/2) psi*(x - s/2)`.
///
/// The wavefunction is interpolated to the half lattice spectrally (zero padding by 2)
/// and the full range of offsets is folded onto the momentum lattice, so the samples are
/// exact values of the continuum Wigner function. The density-matrix kernel is attached.
pub fn wigner_from_wavefunction(psi: &Wavefunction) -> Result<SymbolField> {
    let n2 = psi.norm_sq();
    if (n2 - 1.0).abs() > 1e-10 {
        return Err(Error::NotNormalized(n2));
    }
    let edge = psi.boundary_ratio();
    if edge > 1e-8 {
        return Err(Error::BoundaryMass { mass: edge, limit: 1e-8 });
    }
    let grid = psi.grid;
    let n = grid.n();
    let fine = half_lattice(&psi.values);
    let fft = FftPlanner::new().plan_fft_forward(n);
    let pref = grid.dx() / (2.0 * PI * grid.hbar());
    let values: Vec<Complex64> = (0..n)
        .into_par_iter()
        .flat_map_iter(|i| {
            let mut fold = vec![Complex64::new(0.0, 0.0); n];
            let reach = (2 * i).min(2 * n - 1 - 2 * i) as i64;
            for m in -reach..=reach {
                let a = (2 * i as i64 + m) as usize;
                let b = (2 * i as i64 - m) as usize;
                fold[m.rem_euclid(n as i64) as usize] += fine[a] * fine[b].conj() * alternating(m);
            }
            fft.process(&mut fold);
            fold.into_iter().map(move |v| v * pref)
        })
        .collect();
    let field = SymbolField::raw(grid, values).checked_real()?;
    let rho = KernelMatrix::outer(psi, psi)?.scale(Complex64::new(1.0 / (2.0 * PI * grid.hbar()), 0.0));
    Ok(field.with_kernel(Arc::new(rho)))
}

/// Spectral interpolation onto the lattice of spacing `dx / 2`.
struct HalfLattice {
    n: usize,
    fwd: Arc<dyn rustfft::Fft<f64>>,
    inv: Arc<dyn rustfft::Fft<f64>>,
}

impl HalfLattice {
    fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self { n, fwd: planner.plan_fft_forward(n), inv: planner.plan_fft_inverse(2 * n) }
    }

    fn apply(&self, values: &[Complex64]) -> Vec<Complex64> {
        let n = self.n;
        let mut spec = values.to_vec();
        self.fwd.process(&mut spec);
        let mut padded = vec![Complex64::new(0.0, 0.0); 2 * n];
        for k in 0..n / 2 {
            padded[k] = spec[k];
            padded[2 * n - 1 - k] = spec[n - 1 - k];
        }
        // split the Nyquist bin symmetrically
        padded[n / 2] = spec[n / 2] * 0.5;
        padded[2 * n - n / 2] = spec[n / 2] * 0.5;
        self.inv.process(&mut padded);
        padded.iter().map(|v| v / n as f64).collect()
    }

    /// Both indices of a kernel, row-major `2n x 2n`.
    fn kernel(&self, kernel: &KernelMatrix) -> Vec<Complex64> {
        let n = self.n;
        let cols: Vec<Vec<Complex64>> = (0..n)
            .into_par_iter()
            .map(|b| self.apply(&(0..n).map(|a| kernel.mat[(a, b)]).collect::<Vec<_>>()))
            .collect();
        (0..2 * n)
            .into_par_iter()
            .flat_map_iter(|r| self.apply(&cols.iter().map(|c| c[r]).collect::<Vec<_>>()))
            .collect()
    }
}

fn half_lattice(values: &[Complex64]) -> Vec<Complex64> {
    HalfLattice::new(values.len()).apply(values)
}

/// `2 pi hbar integral P_a P_b`, which equals `|<a|b>|^2` for pure states.
pub fn overlap(pa: &SymbolField, pb: &SymbolField) -> Result<f64> {
    if !pa.is_real() {
        return Err(Error::NotReal(pa.max_imag()));
    }
    if !pb.is_real() {
        return Err(Error::NotReal(pb.max_imag()));
    }
    let prod = pa.mul(pb)?;
    Ok(2.0 * PI * pa.grid().hbar() * prod.integrate2d().re)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian(grid: PhaseGrid, x0: f64, k0: f64) -> Wavefunction {
        let h = grid.hbar();
        Wavefunction::from_fn(grid, |x| {
            let amp = (PI * h).powf(-0.25) * (-(x - x0).powi(2) / (2.0 * h)).exp();
            Complex64::from_polar(amp, k0 * x / h)
        })
        .normalized()
        .unwrap()
    }

    #[test]
    fn lagrange_reproduces_polynomials() {
        for len in [2usize, 5, 16, 40] {
            for k in 0..len - 1 {
                let deg = (len.min(STENCIL) - 1) as i32;
                let f = |t: usize| Complex64::new((t as f64 * 0.3 - 1.0).powi(deg), 0.0);
                let want = ((k as f64 + 0.5) * 0.3 - 1.0).powi(deg);
                let got = half_point(f, len, k).re;
                assert!((got - want).abs() < 1e-8 * want.abs().max(1.0), "{len} {k} {got} {want}");
            }
        }
    }

    #[test]
    fn ground_state_wigner_matches_closed_form() {
        let g = PhaseGrid::new(256, -8.0, 8.0, 1.0).unwrap();
        let p = wigner_from_wavefunction(&gaussian(g, 0.0, 0.0)).unwrap();
        let want = SymbolField::sample_real(g, |x, p| (-(x * x + p * p)).exp() / PI).unwrap();
        assert!(p.is_real());
        assert!(p.distance(&want).unwrap() < 1e-8);
        assert!((p.integrate2d().re - 1.0).abs() < 1e-8);
    }

    #[test]
    fn identity_round_trip() {
        let g = PhaseGrid::new(32, -4.0, 4.0, 1.0).unwrap();
        let one = SymbolField::constant(g, Complex64::new(1.0, 0.0));
        let k = symbol_to_kernel_uncached(&one);
        let id = KernelMatrix::identity(g);
        assert!(k.axpby(Complex64::new(1.0, 0.0), &id, Complex64::new(-1.0, 0.0)).max_abs() < 1e-12);
        let back = kernel_to_symbol(&id);
        assert!(back.distance(&one).unwrap() < 1e-12);
    }

    #[test]
    fn projector_round_trip() {
        let g = PhaseGrid::new(128, -10.0, 10.0, 1.0).unwrap();
        let psi = gaussian(g, 0.7, 0.4);
        let p = wigner_from_wavefunction(&psi).unwrap();
        let sampled = SymbolField::new(g, p.values().to_vec()).unwrap();
        let k = symbol_to_kernel_uncached(&sampled);
        let rho = KernelMatrix::outer(&psi, &psi).unwrap();
        let want = rho.scale(Complex64::new(1.0 / (2.0 * PI), 0.0));
        let diff = k.axpby(Complex64::new(1.0, 0.0), &want, Complex64::new(-1.0, 0.0));
        assert!(diff.max_abs() < 1e-8, "{}", diff.max_abs());
        let back = kernel_to_symbol(&k);
        assert!(back.distance(&sampled).unwrap() < 1e-10);
    }

    #[test]
    fn random_hermitian_kernel_gives_real_symbol() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        let g = PhaseGrid::new(8, -2.0, 2.0, 1.0).unwrap();
        let raw = Mat::from_fn(8, 8, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        let k = KernelMatrix::from_fn(g, |a, b| raw[(a, b)] + raw[(b, a)].conj());
        let s = kernel_to_symbol(&k);
        assert!(s.is_real());
        assert!(s.max_imag() == 0.0);
    }

    #[test]
    fn overlap_of_orthogonal_states() {
        let g = PhaseGrid::new(256, -12.0, 12.0, 1.0).unwrap();
        let p0 = wigner_from_wavefunction(&gaussian(g, 0.0, 0.0)).unwrap();
        let p1 = wigner_from_wavefunction(
            &Wavefunction::from_real_fn(g, |x| x * (-x * x / 2.0).exp()).normalized().unwrap(),
        )
        .unwrap();
        assert!((overlap(&p0, &p0).unwrap() - 1.0).abs() < 1e-10);
        assert!(overlap(&p0, &p1).unwrap().abs() < 1e-10);
        assert_eq!(overlap(&p0, &SymbolField::zeros(g)).unwrap(), 0.0);
    }

    #[test]
    fn galilei_and_parity() {
        let g = PhaseGrid::new(128, -8.0, 8.0, 1.0).unwrap();
        let n = 128;
        let base = wigner_from_wavefunction(&gaussian(g, -0.5, 0.3)).unwrap();
        let shifted = wigner_from_wavefunction(&gaussian(g, -0.5 + 4.0 * g.dx(), 0.3)).unwrap();
        for i in 20..100 {
            for j in 0..n {
                assert!((shifted.get(i + 4, j) - base.get(i, j)).norm() < 1e-12);
            }
        }
        let boosted = wigner_from_wavefunction(&gaussian(g, -0.5, 0.3 + 3.0 * g.dp())).unwrap();
        for i in 0..n {
            for j in 10..n - 10 {
                assert!((boosted.get(i, j + 3) - base.get(i, j)).norm() < 1e-12);
            }
        }
        let psi = gaussian(g, -0.5, 0.3);
        let conj = wigner_from_wavefunction(&psi.conj()).unwrap();
        let mirrored: Vec<Complex64> = psi.values().iter().rev().cloned().collect();
        let mut m2 = vec![Complex64::new(0.0, 0.0); n];
        m2[1..].copy_from_slice(&mirrored[..n - 1]);
        let parity = wigner_from_wavefunction(&Wavefunction::new(g, m2)).unwrap();
        for i in 1..n {
            for j in 1..n {
                assert!((conj.get(i, j) - base.get(i, n - j)).norm() < 1e-12);
                assert!((parity.get(i, j) - base.get(n - i, n - j)).norm() < 1e-12);
            }
        }
    }
}
