//! Star products of sampled symbols and the brackets built on them.
//!
//! Three backends share one interface:
//!
//! * [`StarMethod::ExactPoly`] works on [`PolySymbol`](crate::poly::PolySymbol)s only;
//!   see [`crate::poly`].
//! * [`StarMethod::Kernel`] maps both symbols to operator kernels, multiplies the
//!   matrices and maps back. It is the reference backend for fields.
//! * [`StarMethod::Series`] truncates the bidifferential expansion
//!
//! ```text
//! A * B = sum_k (i hbar / 2)^k / k!  sum_j (-1)^j C(k, j) (dx^(k-j) dp^j A)(dp^(k-j) dx^j B)
//! ```
//!
//! at a fixed order. The series is asymptotic: it is exact for polynomials of low
//! degree and accurate for smooth fields when `hbar` is small against their scales.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::SymbolField;
use crate::spectral::{Axis, Differentiator};
use crate::weyl::kernel_to_symbol;

/// Selects a star-product backend.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[derive(Default)]
pub enum StarMethod {
    ExactPoly,
    #[default]
    Kernel,
    Series(usize),
}

pub const DEFAULT_SERIES_ORDER: usize = 8;
pub const MAX_SERIES_ORDER: usize = 16;
/// Largest frame value of a product, relative to its scale, that the kernel backend accepts.
pub const BOUNDARY_LIMIT: f64 = 1e-6;


impl fmt::Display for StarMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StarMethod::ExactPoly => write!(f, "exactpoly"),
            StarMethod::Kernel => write!(f, "kernel"),
            StarMethod::Series(k) => write!(f, "series:{k}"),
        }
    }
}

impl FromStr for StarMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        match s.as_str() {
            "exactpoly" | "exact" | "poly" => Ok(StarMethod::ExactPoly),
            "kernel" => Ok(StarMethod::Kernel),
            "series" => Ok(StarMethod::Series(DEFAULT_SERIES_ORDER)),
            _ => match s.strip_prefix("series:") {
                Some(k) => {
                    let k: usize = k
                        .parse()
                        .map_err(|_| Error::Unsupported(format!("bad series order in {s:?}")))?;
                    if k > MAX_SERIES_ORDER {
                        return Err(Error::SeriesOrder(k));
                    }
                    Ok(StarMethod::Series(k))
                }
                None => Err(Error::Unsupported(format!("unknown backend {s:?}"))),
            },
        }
    }
}

fn same_grid(a: &SymbolField, b: &SymbolField) -> Result<()> {
    if a.grid() != b.grid() {
        return Err(Error::GridMismatch);
    }
    Ok(())
}

fn check_boundary(out: &SymbolField, a: &SymbolField, b: &SymbolField) -> Result<()> {
    let scale = out.sup_norm().max(a.sup_norm() * b.sup_norm());
    let mass = out.boundary_mass();
    if mass > BOUNDARY_LIMIT * scale {
        return Err(Error::BoundaryMass { mass: mass / scale, limit: BOUNDARY_LIMIT });
    }
    Ok(())
}

/// Star product by kernel composition.
///
/// The boundary check is applied to the product: its largest value on the frame must stay
/// below `1e-6` of `max(sup|A*B|, sup|A| sup|B|)`.
pub fn kernel_star(a: &SymbolField, b: &SymbolField) -> Result<SymbolField> {
    same_grid(a, b)?;
    let k = a.kernel().compose(&b.kernel())?;
    let out = kernel_to_symbol(&k);
    check_boundary(&out, a, b)?;
    Ok(out)
}

/// Per-order terms of the truncated series; `parity` keeps only even or odd orders.
fn series_terms(
    a: &SymbolField,
    b: &SymbolField,
    order: usize,
    parity: Option<usize>,
) -> Result<Vec<Vec<Complex64>>> {
    same_grid(a, b)?;
    if order > MAX_SERIES_ORDER {
        return Err(Error::SeriesOrder(order));
    }
    let grid = *a.grid();
    let nn = grid.n() * grid.n();
    let d = Differentiator::new(grid);
    let half = Complex64::new(0.0, grid.hbar() / 2.0);
    let mut terms = vec![vec![Complex64::new(0.0, 0.0); nn]; order + 1];
    let wanted = |k: usize| parity.is_none_or(|q| k % 2 == q);

    for j in 0..=order {
        if !(j..=order).any(wanted) {
            continue;
        }
        let apj = d.apply(a.values(), Axis::P, j);
        let bxj = d.apply(b.values(), Axis::X, j);
        for i in 0..=order - j {
            let k = i + j;
            if !wanted(k) {
                continue;
            }
            let aij = d.apply(&apj, Axis::X, i);
            let bij = d.apply(&bxj, Axis::P, i);
            let kf: f64 = (1..=k).map(|v| v as f64).product();
            let binom: f64 = (1..=j).map(|v| (k - j + v) as f64 / v as f64).product();
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            let c = half.powu(k as u32) * (sign * binom / kf);
            terms[k]
                .par_iter_mut()
                .zip(aij.par_iter().zip(bij.par_iter()))
                .for_each(|(t, (x, y))| *t += c * x * y);
        }
    }
    Ok(terms)
}

fn sum_terms(grid: crate::grid::PhaseGrid, terms: &[Vec<Complex64>], scale: f64) -> SymbolField {
    let nn = grid.n() * grid.n();
    let values = (0..nn)
        .into_par_iter()
        .map(|q| terms.iter().map(|t| t[q]).sum::<Complex64>() * scale)
        .collect();
    SymbolField::raw(grid, values)
}

/// Star product by the bidifferential series truncated at `order`.
pub fn series_star(a: &SymbolField, b: &SymbolField, order: usize) -> Result<SymbolField> {
    Ok(series_star_diagnostic(a, b, order)?.0)
}

/// Series product together with the sup norm of its highest-order term, which estimates
/// the change between orders `order - 1` and `order`.
pub fn series_star_diagnostic(
    a: &SymbolField,
    b: &SymbolField,
    order: usize,
) -> Result<(SymbolField, f64)> {
    let terms = series_terms(a, b, order, None)?;
    let last = terms[order].iter().map(|v| v.norm()).fold(0.0, f64::max);
    Ok((sum_terms(*a.grid(), &terms, 1.0), last))
}

/// Star product with the chosen backend.
pub fn star(a: &SymbolField, b: &SymbolField, method: StarMethod) -> Result<SymbolField> {
    match method {
        StarMethod::Kernel => kernel_star(a, b),
        StarMethod::Series(k) => series_star(a, b, k),
        StarMethod::ExactPoly => Err(Error::Unsupported(
            "the exact backend acts on polynomial symbols; use poly::poly_star".into(),
        )),
    }
}

/// Moyal bracket `A * B - B * A`.
pub fn moyal_bracket(a: &SymbolField, b: &SymbolField, method: StarMethod) -> Result<SymbolField> {
    same_grid(a, b)?;
    match method {
        StarMethod::Kernel => {
            let k = a.kernel().commutator(&b.kernel())?;
            let out = kernel_to_symbol(&k);
            check_boundary(&out, a, b)?;
            Ok(out)
        }
        StarMethod::Series(order) => {
            // the order-k term is antisymmetric under A <-> B exactly when k is odd
            let terms = series_terms(a, b, order, Some(1))?;
            Ok(sum_terms(*a.grid(), &terms, 2.0))
        }
        StarMethod::ExactPoly => star(a, b, method),
    }
}

/// Classical bracket `dA/dx dB/dp - dA/dp dB/dx`, evaluated pseudospectrally.
pub fn poisson_bracket(a: &SymbolField, b: &SymbolField) -> Result<SymbolField> {
    same_grid(a, b)?;
    let d = Differentiator::new(*a.grid());
    let ax = d.apply(a.values(), Axis::X, 1);
    let ap = d.apply(a.values(), Axis::P, 1);
    let bx = d.apply(b.values(), Axis::X, 1);
    let bp = d.apply(b.values(), Axis::P, 1);
    let values = (0..ax.len()).into_par_iter().map(|q| ax[q] * bp[q] - ap[q] * bx[q]).collect();
    let out = SymbolField::raw(*a.grid(), values);
    if a.is_real() && b.is_real() {
        Ok(out.real_part())
    } else {
        Ok(out)
    }
}

/// `integral A * B`, which the trace property makes equal to `integral A B`.
pub fn star_trace_pair(a: &SymbolField, b: &SymbolField) -> Result<Complex64> {
    Ok(kernel_star(a, b)?.integrate2d())
}

/// Direct lattice quadrature of the four-fold integral form of the star product at one node.
///
/// Cost is `O(n^4)` per node, so this is meant for small grids only; it serves to
/// validate the kernel backend. Samples outside the lattice count as zero.
pub fn integral_star_at(a: &SymbolField, b: &SymbolField, i: usize, j: usize) -> Result<Complex64> {
    same_grid(a, b)?;
    let g = *a.grid();
    let n = g.n() as i64;
    let (dx, dp, h) = (g.dx(), g.dp(), g.hbar());
    let total: Complex64 = (0..n)
        .into_par_iter()
        .map(|k1| {
            let mut acc = Complex64::new(0.0, 0.0);
            let x1 = (k1 - i as i64) as f64 * dx;
            for l1 in 0..n {
                let av = a.get(k1 as usize, l1 as usize);
                if av.norm() == 0.0 {
                    continue;
                }
                let p1 = (l1 - j as i64) as f64 * dp;
                for k2 in 0..n {
                    let x2 = (k2 - i as i64) as f64 * dx;
                    for l2 in 0..n {
                        let p2 = (l2 - j as i64) as f64 * dp;
                        let phase = 2.0 / h * (x1 * p2 - x2 * p1);
                        acc += av * b.get(k2 as usize, l2 as usize) * Complex64::from_polar(1.0, phase);
                    }
                }
            }
            acc
        })
        .collect::<Vec<_>>()
        .into_iter()
        .sum();
    Ok(total * (dx * dp).powi(2) / (PI * h).powi(2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::PhaseGrid;

    fn gauss(g: PhaseGrid, x0: f64, p0: f64, sx: f64, sp: f64) -> SymbolField {
        SymbolField::sample_real(g, |x, p| (-((x - x0) / sx).powi(2) - ((p - p0) / sp).powi(2)).exp())
            .unwrap()
    }

    #[test]
    fn parse_methods() {
        assert_eq!("kernel".parse::<StarMethod>().unwrap(), StarMethod::Kernel);
        assert_eq!("series:5".parse::<StarMethod>().unwrap(), StarMethod::Series(5));
        assert_eq!("series".parse::<StarMethod>().unwrap(), StarMethod::Series(8));
        assert!("series:17".parse::<StarMethod>().is_err());
        assert_eq!(StarMethod::Series(3).to_string(), "series:3");
    }

    #[test]
    fn sho_idempotence_and_eigen() {
        let g = PhaseGrid::new(256, -8.0, 8.0, 1.0).unwrap();
        let p0 = gauss(g, 0.0, 0.0, 1.0, 1.0).scale_real(1.0 / PI);
        let pp = kernel_star(&p0, &p0).unwrap();
        assert!(pp.distance(&p0.scale_real(1.0 / (2.0 * PI))).unwrap() < 1e-8);
        let h = SymbolField::sample_real(g, |x, p| x * x + p * p).unwrap();
        let hp = kernel_star(&h, &p0).unwrap();
        assert!(hp.distance(&p0).unwrap() < 1e-6);
        // the sampled state loses its kernel beyond |x - x'| = L/2, where it is ~1e-7
        let one = SymbolField::constant(g, Complex64::new(1.0, 0.0));
        assert!(kernel_star(&one, &p0).unwrap().distance(&p0).unwrap() < 1e-11);
        let br = moyal_bracket(&h, &p0, StarMethod::Kernel).unwrap();
        assert!(br.sup_norm() < 1e-7);
        let tr = star_trace_pair(&p0, &p0).unwrap();
        assert!((tr.re - 1.0 / (2.0 * PI)).abs() < 1e-10);
    }

    #[test]
    fn series_matches_kernel_on_gaussians() {
        let g = PhaseGrid::new(256, -12.0, 12.0, 0.25).unwrap();
        let a = gauss(g, 0.3, -0.2, 1.5, 1.7);
        let b = gauss(g, -0.4, 0.5, 1.6, 1.4);
        let k = kernel_star(&a, &b).unwrap();
        let (s, last) = series_star_diagnostic(&a, &b, 8).unwrap();
        assert!(k.distance(&s).unwrap() < 1e-6, "{}", k.distance(&s).unwrap());
        assert!(last < 1e-5);
        let s0 = series_star(&a, &b, 0).unwrap();
        assert!(s0.distance(&a.mul(&b).unwrap()).unwrap() < 1e-15);
    }

    #[test]
    fn series_on_polynomials() {
        let g = PhaseGrid::new(64, -4.0, 4.0, 1.0).unwrap();
        let x = SymbolField::sample_real(g, |x, _| x).unwrap();
        let p = SymbolField::sample_real(g, |_, p| p).unwrap();
        let xp = series_star(&x, &p, 3).unwrap();
        let want = SymbolField::sample(g, |x, p| Complex64::new(x * p, 0.5)).unwrap();
        assert!(xp.distance_interior(&want).unwrap() < 1e-8);
        let br = moyal_bracket(&x, &p, StarMethod::Series(8)).unwrap();
        let ih = SymbolField::constant(g, Complex64::new(0.0, 1.0));
        assert!(br.distance_interior(&ih).unwrap() < 1e-8);
        let pb = poisson_bracket(&x, &p).unwrap();
        let one = SymbolField::constant(g, Complex64::new(1.0, 0.0));
        assert!(pb.distance_interior(&one).unwrap() < 1e-10);
    }

    #[test]
    fn kernel_rejects_non_decaying_products() {
        let g = PhaseGrid::new(32, -4.0, 4.0, 1.0).unwrap();
        let x = SymbolField::sample_real(g, |x, _| x).unwrap();
        let p = SymbolField::sample_real(g, |_, p| p).unwrap();
        assert!(matches!(kernel_star(&x, &p), Err(Error::BoundaryMass { .. })));
    }

    #[test]
    fn integral_form_agrees_with_kernel() {
        let g = PhaseGrid::new(64, -8.0, 8.0, 1.0).unwrap();
        let a = gauss(g, 0.1, 0.2, 1.2, 1.5);
        let b = gauss(g, -0.2, -0.3, 1.3, 1.4);
        let k = kernel_star(&a, &b).unwrap();
        for (i, j) in [(32, 32), (30, 35), (36, 29)] {
            let v = integral_star_at(&a, &b, i, j).unwrap();
            assert!((v - k.get(i, j)).norm() < 1e-6, "{} vs {}", v, k.get(i, j));
        }
    }
}
