//! Pseudospectral derivatives of fields along either phase-space axis.
//!
//! A line that decays at both ends is differentiated by FFT directly. A line that does
//! not (polynomial symbols such as `x` or `p^2`) first has a low-degree polynomial
//! removed, fitted by least squares on the outer eighth of the line on each side; the
//! polynomial is differentiated exactly and only the periodic remainder goes through the
//! FFT.

use std::f64::consts::PI;
use std::sync::Arc;

use faer::Mat;
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::grid::{PhaseGrid, SymbolField};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    P,
}

const TREND_DEGREE: usize = 4;

struct LineOps {
    n: usize,
    spacing: f64,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    strip: usize,
    degree: usize,
    // least-squares projection from strip samples to monomial coefficients in t
    proj: Mat<f64>,
}

impl LineOps {
    fn new(n: usize, spacing: f64) -> Self {
        let mut planner = FftPlanner::new();
        let strip = (n / 8).max(1);
        let degree = TREND_DEGREE.min(2 * strip - 1);
        let nodes: Vec<usize> = (0..strip).chain(n - strip..n).collect();
        let c = (n - 1) as f64 / 2.0;
        let v = Mat::from_fn(nodes.len(), degree + 1, |r, k| ((nodes[r] as f64 - c) / c).powi(k as i32));
        let eye = Mat::<f64>::identity(nodes.len(), nodes.len());
        let proj = {
            use faer::linalg::solvers::SolveLstsq;
            
            v.qr().solve_lstsq(&eye)
        };
        Self {
            n,
            spacing,
            fwd: planner.plan_fft_forward(n),
            inv: planner.plan_fft_inverse(n),
            strip,
            degree,
            proj,
        }
    }

    fn t(&self, i: usize) -> f64 {
        let c = (self.n - 1) as f64 / 2.0;
        (i as f64 - c) / c
    }

    /// k-th derivative of one line; `decays` selects the plain FFT path.
    fn derivative(&self, line: &mut [Complex64], k: usize, decays: bool) {
        let n = self.n;
        let mut trend = vec![Complex64::new(0.0, 0.0); n];
        if !decays {
            let samples: Vec<Complex64> =
                (0..self.strip).chain(n - self.strip..n).map(|i| line[i]).collect();
            let coeffs: Vec<Complex64> = (0..=self.degree)
                .map(|l| {
                    samples
                        .iter()
                        .enumerate()
                        .map(|(r, s)| s * self.proj[(l, r)])
                        .sum()
                })
                .collect();
            let dt_dx = 2.0 / ((n - 1) as f64 * self.spacing);
            for (i, v) in line.iter_mut().enumerate() {
                let t = self.t(i);
                let q: Complex64 = coeffs.iter().enumerate().map(|(l, c)| c * t.powi(l as i32)).sum();
                *v -= q;
                trend[i] = coeffs
                    .iter()
                    .enumerate()
                    .skip(k)
                    .map(|(l, c)| {
                        let f: f64 = (0..k).map(|r| (l - r) as f64).product();
                        c * (f * t.powi((l - k) as i32))
                    })
                    .sum::<Complex64>()
                    * dt_dx.powi(k as i32);
            }
        }
        self.fwd.process(line);
        let len = n as f64 * self.spacing;
        for (m, v) in line.iter_mut().enumerate() {
            let idx = if m < n / 2 { m as f64 } else { m as f64 - n as f64 };
            if m == n / 2 && k % 2 == 1 {
                *v = Complex64::new(0.0, 0.0);
                continue;
            }
            let kappa = 2.0 * PI * idx / len;
            *v *= Complex64::new(0.0, kappa).powu(k as u32) / n as f64;
        }
        self.inv.process(line);
        for (v, t) in line.iter_mut().zip(&trend) {
            *v += t;
        }
    }
}

/// Reusable derivative operator for one grid.
pub struct Differentiator {
    grid: PhaseGrid,
    x_ops: LineOps,
    p_ops: LineOps,
}

impl Differentiator {
    pub fn new(grid: PhaseGrid) -> Self {
        Self { grid, x_ops: LineOps::new(grid.n(), grid.dx()), p_ops: LineOps::new(grid.n(), grid.dp()) }
    }

    pub fn grid(&self) -> &PhaseGrid {
        &self.grid
    }

    /// `d^k/dx^k` or `d^k/dp^k` of row-major values on this grid.
    pub fn apply(&self, values: &[Complex64], axis: Axis, k: usize) -> Vec<Complex64> {
        if k == 0 {
            return values.to_vec();
        }
        let n = self.grid.n();
        let scale = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let decays = |line: &[Complex64]| line[0].norm().max(line[n - 1].norm()) <= 1e-12 * scale;
        match axis {
            Axis::P => values
                .par_chunks(n)
                .flat_map_iter(|row| {
                    let mut line = row.to_vec();
                    let d = decays(&line);
                    self.p_ops.derivative(&mut line, k, d);
                    line
                })
                .collect(),
            Axis::X => {
                let cols: Vec<Vec<Complex64>> = (0..n)
                    .into_par_iter()
                    .map(|j| {
                        let mut line: Vec<Complex64> = (0..n).map(|i| values[i * n + j]).collect();
                        let d = decays(&line);
                        self.x_ops.derivative(&mut line, k, d);
                        line
                    })
                    .collect();
                let mut out = vec![Complex64::new(0.0, 0.0); n * n];
                for (j, col) in cols.iter().enumerate() {
                    for (i, v) in col.iter().enumerate() {
                        out[i * n + j] = *v;
                    }
                }
                out
            }
        }
    }

    pub fn field(&self, f: &SymbolField, axis: Axis, k: usize) -> SymbolField {
        SymbolField::raw(*f.grid(), self.apply(f.values(), axis, k))
    }
}
