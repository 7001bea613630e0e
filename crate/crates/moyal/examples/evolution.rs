//! Phase-space flow under the oscillator Hamiltonian. A displaced Gaussian
//! rotates rigidly while eigenstates stay put.

use std::f64::consts::PI;

use moyal::dynamics::{evolve_step, stability_number};
use moyal::models::ShoModel;
use moyal::star::StarMethod;
use moyal::susy::{build_wigner_sequence, ShapeInvariantModel};
use moyal::{PhaseGrid, Result, SymbolField};

fn centroid(p: &SymbolField) -> (f64, f64) {
    let g = p.grid();
    let (mut x, mut q, mut m) = (0.0, 0.0, 0.0);
    for i in 0..g.n() {
        for j in 0..g.n() {
            let v = p.get(i, j).re;
            x += g.x(i) * v;
            q += g.p(j) * v;
            m += v;
        }
    }
    (x / m, q / m)
}

fn main() -> Result<()> {
    let grid = PhaseGrid::new(64, -8.0, 8.0, 1.0)?;
    let sho = ShoModel::new(1.0)?;
    let h = sho.hamiltonian(grid)?;
    let mut p = SymbolField::sample_real(grid, |x, q| (-(x - 2.0).powi(2) - q * q).exp() / PI)?;

    let steps = 800;
    let dt = (PI / 2.0) / steps as f64;
    println!("stability number {:.3}", stability_number(&h, dt));
    for k in 0..=steps {
        if k % 200 == 0 {
            let (x, q) = centroid(&p);
            println!("t = {:.4}: centroid ({x:+.6}, {q:+.6}), norm {:.10}", k as f64 * dt, p.integrate2d().re);
        }
        if k < steps {
            p = evolve_step(&p, &h, dt, StarMethod::Kernel)?;
        }
    }

    // ladder-built states carry their exact kernels
    let model = ShapeInvariantModel::sho(2.0, 1.0)?;
    let p2 = build_wigner_sequence(&model, grid, 2)?.remove(2);
    let mut q = p2.clone();
    for _ in 0..1000 {
        q = evolve_step(&q, &h, 1e-3, StarMethod::Kernel)?;
    }
    println!("P2 after t = 1: drift {:.1e}", q.distance(&p2)?);
    Ok(())
}
