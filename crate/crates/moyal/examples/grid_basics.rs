//! Phase-space grids, sampled symbols, integrals and marginals.

use moyal::{PhaseGrid, Result, SymbolField};

fn main() -> Result<()> {
    let grid = PhaseGrid::new(128, -8.0, 8.0, 1.0)?;
    println!("n = {}, dx = {:.4}, dp = {:.4}", grid.n(), grid.dx(), grid.dp());
    println!("x in [{}, {}), p in [{:.3}, {:.3}]", grid.x_min(), grid.x_max(), grid.p(0), grid.p(grid.n() - 1));

    // a normalized coherent-state Wigner function centred at (1, -0.5)
    let w = SymbolField::sample_real(grid, |x, p| {
        (-(x - 1.0).powi(2) - (p + 0.5).powi(2)).exp() / std::f64::consts::PI
    })?;
    println!("integral = {:.12}", w.integrate2d().re);
    println!("boundary mass = {:.2e}", w.boundary_mass());

    let (xm, pm) = w.marginals()?;
    let mean_x: f64 = grid.xs().iter().zip(&xm).map(|(x, r)| x * r * grid.dx()).sum();
    let mean_p: f64 = grid.ps().iter().zip(&pm).map(|(p, r)| p * r * grid.dp()).sum();
    println!("<x> = {mean_x:.6}, <p> = {mean_p:.6}");

    let mut bytes = Vec::new();
    w.write_binary(&mut bytes)?;
    let back = SymbolField::read_binary(bytes.as_slice())?;
    println!("binary round trip: {} bytes, distance {:.1e}", bytes.len(), back.distance(&w)?);
    Ok(())
}
