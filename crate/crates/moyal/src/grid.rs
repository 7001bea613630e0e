//! Discretized phase space: the lattice, sampled symbols, quadrature and marginals.
//!
//! The momentum axis is not a free choice. With `n` points of spacing `dx` in position,
//! the momentum spacing is fixed by FFT conjugacy, `dx * dp * n = 2 pi hbar`, and the
//! axis runs over `p_j = (j - n/2) dp`. Fields are stored row-major with the row index
//! running over `x` and the column index over `p`.

use std::f64::consts::PI;
use std::io::{Read, Write};
use std::path::Path;
use std::sync::{Arc, OnceLock};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::weyl::KernelMatrix;

/// Uniform `(x, p)` lattice with a fixed Planck constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseGrid {
    n: usize,
    x_min: f64,
    x_max: f64,
    hbar: f64,
}

impl PhaseGrid {
    /// Builds a grid of `n_x` points on `[x_min, x_max)`.
    ///
    /// `n_x` must be a power of two no smaller than 8.
    pub fn new(n_x: usize, x_min: f64, x_max: f64, hbar: f64) -> Result<Self> {
        if n_x < 8 || !n_x.is_power_of_two() {
            return Err(Error::InvalidGrid(format!("n_x = {n_x} must be a power of two >= 8")));
        }
        if !(x_min.is_finite() && x_max.is_finite()) || x_max <= x_min {
            return Err(Error::InvalidGrid(format!("empty interval [{x_min}, {x_max}]")));
        }
        if !(hbar.is_finite() && hbar > 0.0) {
            return Err(Error::InvalidGrid(format!("hbar = {hbar} must be positive")));
        }
        Ok(Self { n: n_x, x_min, x_max, hbar })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn length(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn dx(&self) -> f64 {
        self.length() / self.n as f64
    }

    pub fn dp(&self) -> f64 {
        2.0 * PI * self.hbar / self.length()
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx()
    }

    pub fn p(&self, j: usize) -> f64 {
        (j as f64 - (self.n / 2) as f64) * self.dp()
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.x(i)).collect()
    }

    pub fn ps(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.p(j)).collect()
    }

    /// Same lattice with a different Planck constant.
    pub fn with_hbar(&self, hbar: f64) -> Result<Self> {
        Self::new(self.n, self.x_min, self.x_max, hbar)
    }

    /// Index range kept by the interior window: 12.5% of the nodes are dropped on each edge.
    pub fn interior(&self) -> std::ops::Range<usize> {
        let cut = self.n / 8;
        cut..self.n - cut
    }
}

/// Complex samples of a phase-space function on a [`PhaseGrid`].
///
/// A field may carry the operator kernel it was built from. Star products use that
/// kernel instead of reconstructing one from the samples, which matters for states
/// whose kernel is wider than half the box.
#[derive(Debug, Clone)]
pub struct SymbolField {
    grid: PhaseGrid,
    values: Vec<Complex64>,
    real_valued: bool,
    kernel: OnceLock<Arc<KernelMatrix>>,
}

const REAL_TOL: f64 = 1e-12;

impl SymbolField {
    pub fn new(grid: PhaseGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.n * grid.n {
            return Err(Error::Format(format!(
                "expected {} values, got {}",
                grid.n * grid.n,
                values.len()
            )));
        }
        Ok(Self::raw(grid, values))
    }

    pub(crate) fn raw(grid: PhaseGrid, values: Vec<Complex64>) -> Self {
        Self { grid, values, real_valued: false, kernel: OnceLock::new() }
    }

    pub fn zeros(grid: PhaseGrid) -> Self {
        let mut f = Self::raw(grid, vec![Complex64::new(0.0, 0.0); grid.n * grid.n]);
        f.real_valued = true;
        f
    }

    pub fn constant(grid: PhaseGrid, c: Complex64) -> Self {
        let mut f = Self::raw(grid, vec![c; grid.n * grid.n]);
        f.real_valued = c.im == 0.0;
        f
    }

    /// Samples `f(x_i, p_j)` on every node; a non-finite sample is reported with its node.
    pub fn sample<F>(grid: PhaseGrid, f: F) -> Result<Self>
    where
        F: Fn(f64, f64) -> Complex64 + Sync,
    {
        let n = grid.n;
        let values: Vec<Complex64> = (0..n * n)
            .into_par_iter()
            .map(|k| f(grid.x(k / n), grid.p(k % n)))
            .collect();
        if let Some(k) = values.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
            let (i, j) = (k / n, k % n);
            return Err(Error::NonFinite {
                i,
                j,
                x: grid.x(i),
                p: grid.p(j),
                value: values[k].to_string(),
            });
        }
        Ok(Self::raw(grid, values))
    }

    /// Real-valued variant of [`SymbolField::sample`]; the result is flagged real.
    pub fn sample_real<F>(grid: PhaseGrid, f: F) -> Result<Self>
    where
        F: Fn(f64, f64) -> f64 + Sync,
    {
        let mut field = Self::sample(grid, |x, p| Complex64::new(f(x, p), 0.0))?;
        field.real_valued = true;
        Ok(field)
    }

    pub fn grid(&self) -> &PhaseGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.values[i * self.grid.n + j]
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        let n = self.grid.n;
        &self.values[i * n..(i + 1) * n]
    }

    pub fn is_real(&self) -> bool {
        self.real_valued
    }

    pub fn max_imag(&self) -> f64 {
        self.values.iter().map(|v| v.im.abs()).fold(0.0, f64::max)
    }

    pub fn max_real(&self) -> f64 {
        self.values.iter().map(|v| v.re.abs()).fold(0.0, f64::max)
    }

    /// Flags the field as real after checking `max|Im| <= tol * max|Re|`.
    pub fn into_real(mut self, tol: f64) -> Result<Self> {
        let im = self.max_imag();
        if im > tol * self.max_real().max(f64::MIN_POSITIVE) {
            return Err(Error::NotReal(im));
        }
        self.real_valued = true;
        Ok(self)
    }

    /// Flags the field as real using the default tolerance of `1e-12` relative.
    pub fn checked_real(self) -> Result<Self> {
        self.into_real(REAL_TOL)
    }

    /// Drops imaginary parts and flags the field real.
    pub fn real_part(&self) -> Self {
        let mut f = Self::raw(
            self.grid,
            self.values.iter().map(|v| Complex64::new(v.re, 0.0)).collect(),
        );
        f.real_valued = true;
        f
    }

    /// Kernel the field was built from, if any.
    pub fn cached_kernel(&self) -> Option<&Arc<KernelMatrix>> {
        self.kernel.get()
    }

    /// Attaches an operator kernel whose Weyl symbol these samples are.
    pub fn with_kernel(self, kernel: Arc<KernelMatrix>) -> Self {
        let cell = OnceLock::new();
        let _ = cell.set(kernel);
        Self { kernel: cell, ..self }
    }

    /// Operator kernel of this symbol, reconstructed from the samples on first use.
    pub fn kernel(&self) -> Arc<KernelMatrix> {
        self.kernel
            .get_or_init(|| Arc::new(crate::weyl::symbol_to_kernel_uncached(self)))
            .clone()
    }

    fn check_grid(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        Ok(())
    }

    fn combine_kernels<F>(&self, other: &Self, f: F) -> Option<Arc<KernelMatrix>>
    where
        F: Fn(&KernelMatrix, &KernelMatrix) -> KernelMatrix,
    {
        match (self.kernel.get(), other.kernel.get()) {
            (Some(a), Some(b)) => Some(Arc::new(f(a, b))),
            _ => None,
        }
    }

    fn finish(mut self, real: bool, kernel: Option<Arc<KernelMatrix>>) -> Self {
        self.real_valued = real;
        match kernel {
            Some(k) => self.with_kernel(k),
            None => self,
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.axpby(Complex64::new(1.0, 0.0), other, Complex64::new(1.0, 0.0))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.axpby(Complex64::new(1.0, 0.0), other, Complex64::new(-1.0, 0.0))
    }

    /// `alpha * self + beta * other`, carrying kernels along when both operands have one.
    pub fn axpby(&self, alpha: Complex64, other: &Self, beta: Complex64) -> Result<Self> {
        self.check_grid(other)?;
        let values = self
            .values
            .par_iter()
            .zip(other.values.par_iter())
            .map(|(a, b)| alpha * a + beta * b)
            .collect();
        let real = self.real_valued && other.real_valued && alpha.im == 0.0 && beta.im == 0.0;
        let kernel = self.combine_kernels(other, |a, b| a.axpby(alpha, b, beta));
        Ok(Self::raw(self.grid, values).finish(real, kernel))
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let values = self.values.par_iter().map(|v| c * v).collect();
        let kernel = self.kernel.get().map(|k| Arc::new(k.scale(c)));
        Self::raw(self.grid, values).finish(self.real_valued && c.im == 0.0, kernel)
    }

    pub fn scale_real(&self, c: f64) -> Self {
        self.scale(Complex64::new(c, 0.0))
    }

    /// Pointwise (commutative) product.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_grid(other)?;
        let values = self
            .values
            .par_iter()
            .zip(other.values.par_iter())
            .map(|(a, b)| a * b)
            .collect();
        Ok(Self::raw(self.grid, values).finish(self.real_valued && other.real_valued, None))
    }

    /// Complex conjugate symbol; its kernel is the adjoint.
    pub fn conj(&self) -> Self {
        let values = self.values.iter().map(|v| v.conj()).collect();
        let kernel = self.kernel.get().map(|k| Arc::new(k.adjoint()));
        Self::raw(self.grid, values).finish(self.real_valued, kernel)
    }

    pub fn map<F>(&self, f: F) -> Self
    where
        F: Fn(Complex64) -> Complex64 + Sync,
    {
        Self::raw(self.grid, self.values.par_iter().map(|v| f(*v)).collect())
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Sup norm restricted to the interior window.
    pub fn sup_norm_interior(&self) -> f64 {
        let r = self.grid.interior();
        let mut m = 0.0f64;
        for i in r.clone() {
            for j in r.clone() {
                m = m.max(self.get(i, j).norm());
            }
        }
        m
    }

    /// `sup |self - other|` over the whole lattice.
    pub fn distance(&self, other: &Self) -> Result<f64> {
        self.check_grid(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// `sup |self - other|` over the interior window.
    pub fn distance_interior(&self, other: &Self) -> Result<f64> {
        Ok(self.sub(other)?.sup_norm_interior())
    }

    /// Largest modulus on the outermost frame of the lattice.
    pub fn boundary_mass(&self) -> f64 {
        let n = self.grid.n;
        let mut m = 0.0f64;
        for k in 0..n {
            for v in [self.get(0, k), self.get(n - 1, k), self.get(k, 0), self.get(k, n - 1)] {
                m = m.max(v.norm());
            }
        }
        m
    }

    /// Midpoint rule `sum values * dx * dp` with an ordered reduction.
    pub fn integrate2d(&self) -> Complex64 {
        let n = self.grid.n;
        let rows: Vec<Complex64> = self
            .values
            .par_chunks(n)
            .map(|r| r.iter().sum::<Complex64>())
            .collect();
        rows.iter().sum::<Complex64>() * (self.grid.dx() * self.grid.dp())
    }

    /// Position and momentum marginals of a real field.
    pub fn marginals(&self) -> Result<(Vec<f64>, Vec<f64>)> {
        if !self.real_valued {
            return Err(Error::NotReal(self.max_imag()));
        }
        let n = self.grid.n;
        let (dx, dp) = (self.grid.dx(), self.grid.dp());
        let xm = (0..n).map(|i| self.row(i).iter().map(|v| v.re).sum::<f64>() * dp).collect();
        let pm = (0..n)
            .map(|j| (0..n).map(|i| self.get(i, j).re).sum::<f64>() * dx)
            .collect();
        Ok((xm, pm))
    }

    /// Writes the field in the `MFG1` binary layout.
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        let g = &self.grid;
        let mut buf = Vec::with_capacity(32 + 16 * self.values.len());
        buf.extend_from_slice(b"MFG1");
        buf.extend_from_slice(&(g.n as u32).to_le_bytes());
        for v in [g.x_min, g.x_max, g.hbar] {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        for v in &self.values {
            buf.extend_from_slice(&v.re.to_le_bytes());
            buf.extend_from_slice(&v.im.to_le_bytes());
        }
        w.write_all(&buf)?;
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes)?;
        if bytes.len() < 32 || &bytes[..4] != b"MFG1" {
            return Err(Error::Format("missing MFG1 header".into()));
        }
        let f64_at = |k: usize| f64::from_le_bytes(bytes[k..k + 8].try_into().unwrap());
        let n = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
        let grid = PhaseGrid::new(n, f64_at(8), f64_at(16), f64_at(24))?;
        if bytes.len() != 32 + 16 * n * n {
            return Err(Error::Format(format!("payload of {} bytes for n_x = {n}", bytes.len() - 32)));
        }
        let values = (0..n * n)
            .map(|k| Complex64::new(f64_at(32 + 16 * k), f64_at(40 + 16 * k)))
            .collect();
        SymbolField::new(grid, values)
    }

    pub fn save_binary(&self, path: impl AsRef<Path>) -> Result<()> {
        self.write_binary(std::io::BufWriter::new(std::fs::File::create(path)?))
    }

    pub fn load_binary(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_binary(std::io::BufReader::new(std::fs::File::open(path)?))
    }
}
