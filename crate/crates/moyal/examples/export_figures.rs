//! Writes the oscillator and Morse Wigner functions as CSV and binary files,
//! the same output `mf wigner` produces.

use std::path::PathBuf;

use moyal::cli::{export_field, ExportFormat};
use moyal::models::ShoModel;
use moyal::susy::{build_wigner_sequence, ShapeInvariantModel};
use moyal::{PhaseGrid, Result};

fn main() -> Result<()> {
    let out = std::env::args().nth(1).map_or_else(|| std::env::temp_dir().join("moyal_figures"), PathBuf::from);
    let formats = [ExportFormat::Csv, ExportFormat::Bin];

    let grid = PhaseGrid::new(128, -8.0, 8.0, 1.0)?;
    let sho = ShoModel::new(1.0)?;
    for n in [0, 1, 5] {
        for f in export_field(&out, &format!("sho_P{n}"), &sho.wigner(n, grid)?, &formats)? {
            println!("{}", f.display());
        }
    }

    let grid = PhaseGrid::new(256, -4.0, 40.0, 1.0)?;
    let morse = ShapeInvariantModel::morse(5.0, 1.0, 1.0, 1.0)?;
    for (n, p) in build_wigner_sequence(&morse, grid, 1)?.iter().enumerate() {
        for f in export_field(&out, &format!("morse_P{n}"), p, &formats)? {
            println!("{}", f.display());
        }
    }
    Ok(())
}
