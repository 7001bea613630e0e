//! Shape-invariance energies against direct diagonalization, and how the box
//! edges decide whether the oracle can be trusted.

use moyal::oracle::{discretize_hamiltonian, eigensolve_lowest};
use moyal::susy::{si_energy, ShapeInvariantModel};
use moyal::{PhaseGrid, Result};

fn main() -> Result<()> {
    let model = ShapeInvariantModel::morse(5.0, 1.0, 1.0, 1.0)?;
    let exact: Vec<f64> = (0..=model.n_bound).map(|n| si_energy(&model, n)).collect::<Result<_>>()?;
    println!("shape invariance: {exact:?}");

    for (lo, hi) in [(-4.0, 14.0), (-3.0, 14.0), (-2.0, 14.0)] {
        let grid = PhaseGrid::new(512, lo, hi, 1.0)?;
        let h = discretize_hamiltonian(|x| model.v_minus(x, model.a0), grid)?;
        let spec = eigensolve_lowest(&h, exact.len())?;
        let worst = exact
            .iter()
            .zip(&spec.energies)
            .map(|(e, o)| (e - o).abs() / e.abs().max(1.0))
            .fold(0.0, f64::max);
        println!("x in [{lo}, {hi}]: oracle {:.6?}, worst relative error {worst:.1e}", spec.energies);
    }
    Ok(())
}
