//! Morse bound states from the ground state of each shape-invariant partner.

use moyal::dynamics::star_eigen_residual;
use moyal::star::StarMethod;
use moyal::susy::{self, Direction, ShapeInvariantModel};
use moyal::{PhaseGrid, Result};

fn main() -> Result<()> {
    let grid = PhaseGrid::new(512, -4.0, 40.0, 1.0)?;
    let model = ShapeInvariantModel::morse(5.0, 1.0, 1.0, 1.0)?;
    let h = model.h_minus(model.a0, grid)?;

    let tower = susy::build_wigner_sequence(&model, grid, model.n_bound)?;
    for (n, p) in tower.iter().enumerate() {
        let e = susy::si_energy(&model, n)?;
        let min = p.values().iter().map(|v| v.re).fold(f64::INFINITY, f64::min);
        println!(
            "n = {n}: E = {e:4}, residual {:.1e}, min P {min:+.4}",
            star_eigen_residual(&h, p, e, StarMethod::Kernel)?
        );
    }

    // P1 of H- maps down to the ground state of the partner H+
    let e1 = susy::si_energy(&model, 1)?;
    let down = susy::partner_wigner_map(&tower[1], &model, model.a0, Direction::Down, e1)?;
    let partner_ground = susy::ground_wigner(&model, model.orbit(1), grid)?;
    println!("A P1 A^+ vs partner ground state: {:.1e}", down.distance(&partner_ground)?);
    Ok(())
}
