//! Harmonic-oscillator Wigner functions built by the ladder, compared with the
//! Laguerre closed form.

use moyal::dynamics::star_eigen_residual;
use moyal::models::ShoModel;
use moyal::star::StarMethod;
use moyal::susy::{build_wigner_sequence, si_energy, ShapeInvariantModel};
use moyal::weyl::overlap;
use moyal::{PhaseGrid, Result};

fn main() -> Result<()> {
    let grid = PhaseGrid::new(256, -8.0, 8.0, 1.0)?;
    let model = ShapeInvariantModel::sho(2.0, 1.0)?;
    let sho = ShoModel::new(1.0)?;
    let h = sho.hamiltonian(grid)?;

    let tower = build_wigner_sequence(&model, grid, 5)?;
    println!(" n   E_SI  closed-form distance  H*P residual   P(0,0)");
    for (n, p) in tower.iter().enumerate() {
        let closed = sho.wigner(n, grid)?;
        let e = sho.energy(n);
        println!(
            "{n:2} {:6.1} {:21.2e} {:13.2e} {:+9.5}",
            si_energy(&model, n)? + 1.0,
            p.distance(&closed)?,
            star_eigen_residual(&h, p, e, StarMethod::Kernel)?,
            p.get(grid.n() / 2, grid.n() / 2).re
        );
    }
    println!("2 pi hbar int P0 P0 = {:.10}", overlap(&tower[0], &tower[0])?);
    Ok(())
}
