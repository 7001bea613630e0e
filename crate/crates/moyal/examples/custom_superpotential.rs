//! A superpotential given as an expression string. Here `W = a - b exp(-x)`,
//! which reproduces the Morse ladder with the shift `a -> a - 1`.

use std::collections::BTreeMap;

use moyal::cli::custom_model;
use moyal::oracle::{discretize_hamiltonian, eigensolve_lowest};
use moyal::susy::{shape_invariance_residual, si_energy};
use moyal::{PhaseGrid, Result};

fn main() -> Result<()> {
    let fixed = BTreeMap::from([("b".to_string(), 1.0)]);
    let model = custom_model("a - b*exp(-x)", &fixed, 5.0, 1.0, 4, 1.0)?;

    let grid = PhaseGrid::new(512, -4.0, 20.0, 1.0)?;
    let xs = grid.xs();
    println!("shape-invariance residual {:.1e}", shape_invariance_residual(&model, &xs));

    let h = discretize_hamiltonian(|x| model.v_minus(x, model.a0), grid)?;
    let spec = eigensolve_lowest(&h, 5)?;
    for n in 0..=4 {
        println!("E_{n} = {:8.4}  oracle {:10.6}", si_energy(&model, n)?, spec.energies[n]);
    }
    Ok(())
}
