//! Wigner functions of wavefunctions. A two-packet superposition shows the
//! interference fringes and negative regions that no classical density has.

use moyal::weyl::{wigner_from_wavefunction, Wavefunction};
use moyal::{PhaseGrid, Result};

fn main() -> Result<()> {
    let grid = PhaseGrid::new(256, -10.0, 10.0, 1.0)?;
    let packet = |x0: f64| move |x: f64| (-(x - x0).powi(2) / 2.0).exp();
    let cat = Wavefunction::from_real_fn(grid, |x| packet(-3.0)(x) + packet(3.0)(x)).normalized()?;
    let w = wigner_from_wavefunction(&cat)?;

    let min = w.values().iter().map(|v| v.re).fold(f64::INFINITY, f64::min);
    let max = w.values().iter().map(|v| v.re).fold(f64::NEG_INFINITY, f64::max);
    println!("integral {:.12}, min {min:.4}, max {max:.4}", w.integrate2d().re);

    let (xm, _) = w.marginals()?;
    let density: Vec<f64> = cat.values().iter().map(|v| v.norm_sqr()).collect();
    let worst = xm.iter().zip(&density).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    println!("position marginal vs |psi|^2: {worst:.1e}");

    // fringes along p at x = 0
    let i0 = grid.n() / 2;
    for j in grid.n() / 2..grid.n() / 2 + 10 {
        println!("  p = {:6.3}  W = {:+.5}", grid.p(j), w.get(i0, j).re);
    }
    Ok(())
}
