use moyal::models::ShoModel;
use moyal::{PhaseGrid, SymbolField};
use num_complex::Complex64;
use proptest::prelude::*;

fn grid() -> PhaseGrid {
    PhaseGrid::new(32, -4.0, 4.0, 0.5).unwrap()
}

proptest! {
    #[test]
    fn integration_is_linear(a in -3.0f64..3.0, b in -3.0f64..3.0, c in -2.0f64..2.0) {
        let f = SymbolField::sample_real(grid(), |x, p| (-(x - c).powi(2) - p * p).exp()).unwrap();
        let g = SymbolField::sample(grid(), |x, p| Complex64::new(x * p, (x + c).cos())).unwrap();
        let combo = f.axpby(Complex64::new(a, 0.0), &g, Complex64::new(b, 0.0)).unwrap();
        let lhs = combo.integrate2d();
        let rhs = f.integrate2d() * a + g.integrate2d() * b;
        prop_assert!((lhs - rhs).norm() <= 1e-12 * (1.0 + lhs.norm()));
    }
}

#[test]
fn binary_round_trip_is_exact() {
    let f = SymbolField::sample(grid(), |x, p| Complex64::new(x.sin() * p, 1.0 / 3.0 + x * 1e-300)).unwrap();
    let mut bytes = Vec::new();
    f.write_binary(&mut bytes).unwrap();
    assert_eq!(bytes.len(), 32 + 16 * 32 * 32);
    let g = SymbolField::read_binary(bytes.as_slice()).unwrap();
    assert_eq!(g.grid(), f.grid());
    assert!(f.values().iter().zip(g.values()).all(|(a, b)| a.re.to_bits() == b.re.to_bits() && a.im.to_bits() == b.im.to_bits()));

    let path = std::path::Path::new(env!("CARGO_TARGET_TMPDIR")).join("round_trip.bin");
    f.save_binary(&path).unwrap();
    assert_eq!(SymbolField::load_binary(&path).unwrap().values(), f.values());
}

#[test]
fn corrupt_binary_is_rejected() {
    let mut bytes = Vec::new();
    SymbolField::zeros(grid()).write_binary(&mut bytes).unwrap();
    assert!(SymbolField::read_binary(&bytes[..bytes.len() - 8]).is_err());
    bytes[0] = b'X';
    assert!(SymbolField::read_binary(bytes.as_slice()).is_err());
}

#[test]
fn marginals_are_densities() {
    let g = PhaseGrid::new(128, -8.0, 8.0, 1.0).unwrap();
    let p3 = ShoModel::new(1.0).unwrap().wigner(3, g).unwrap();
    let (xm, pm) = p3.marginals().unwrap();
    let (sx, sp) = (xm.iter().sum::<f64>() * g.dx(), pm.iter().sum::<f64>() * g.dp());
    assert!((sx - 1.0).abs() < 1e-10 && (sp - 1.0).abs() < 1e-10);
    assert!(xm.iter().chain(&pm).all(|v| *v > -1e-12));
}
