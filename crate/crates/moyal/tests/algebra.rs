use moyal::poly::{poly_moyal_bracket, poly_poisson_bracket, poly_star, PolySymbol};
use moyal::star::{kernel_star, star_trace_pair};
use moyal::{PhaseGrid, SymbolField};
use num_complex::Complex64;
use proptest::prelude::*;

fn poly() -> impl Strategy<Value = PolySymbol> {
    prop::collection::vec(((0u32..=3, 0u32..=3), (-2.0f64..2.0, -2.0f64..2.0)), 1..6).prop_map(|terms| {
        terms.into_iter().fold(PolySymbol::zero(), |acc, ((dx, dp), (re, im))| {
            acc.add(&PolySymbol::monomial(Complex64::new(re, im), dx, dp, 0))
        })
    })
}

fn close(a: &PolySymbol, b: &PolySymbol) -> bool {
    a.sub(b).max_coeff() <= 1e-12 * a.max_coeff().max(b.max_coeff()).max(1.0)
}

proptest! {
    #[test]
    fn star_is_associative(f in poly(), g in poly(), h in poly()) {
        let l = poly_star(&poly_star(&f, &g).unwrap(), &h).unwrap();
        let r = poly_star(&f, &poly_star(&g, &h).unwrap()).unwrap();
        prop_assert!(close(&l, &r));
    }

    #[test]
    fn bracket_is_antisymmetric(f in poly(), g in poly()) {
        let fg = poly_moyal_bracket(&f, &g).unwrap();
        let gf = poly_moyal_bracket(&g, &f).unwrap();
        prop_assert!(close(&fg, &gf.scale(Complex64::new(-1.0, 0.0))));
    }

    #[test]
    fn conjugation_reverses_products(f in poly(), g in poly()) {
        let l = poly_star(&f, &g).unwrap().conj();
        let r = poly_star(&g.conj(), &f.conj()).unwrap();
        prop_assert!(close(&l, &r));
    }

    #[test]
    fn bracket_starts_with_poisson(f in poly(), g in poly()) {
        let quantum = poly_moyal_bracket(&f, &g).unwrap().div_hbar().unwrap().scale(Complex64::new(0.0, -1.0));
        let leading = quantum.at_hbar(0.0);
        prop_assert!(close(&leading, &poly_poisson_bracket(&f, &g).unwrap()));
    }

    #[test]
    fn quadratic_brackets_are_classical(a in -2.0f64..2.0, b in -2.0f64..2.0, g in poly()) {
        let f = PolySymbol::monomial(Complex64::new(a, 0.0), 2, 0, 0)
            .add(&PolySymbol::monomial(Complex64::new(b, 0.0), 1, 1, 0));
        let quantum = poly_moyal_bracket(&f, &g).unwrap().div_hbar().unwrap().scale(Complex64::new(0.0, -1.0));
        prop_assert!(close(&quantum, &poly_poisson_bracket(&f, &g).unwrap()));
    }
}

fn gaussian(grid: PhaseGrid, x0: f64, p0: f64, w: f64) -> SymbolField {
    SymbolField::sample_real(grid, |x, p| (-((x - x0).powi(2) + (p - p0).powi(2)) / (w * w)).exp()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn kernel_products_of_gaussians(x0 in -1.0f64..1.0, p0 in -1.0f64..1.0, w in 0.8f64..1.4) {
        let g = PhaseGrid::new(64, -8.0, 8.0, 1.0).unwrap();
        let a = gaussian(g, x0, p0, w);
        let b = gaussian(g, -p0, x0, 1.0);
        let ab = kernel_star(&a, &b).unwrap();
        let ba = kernel_star(&b, &a).unwrap();
        prop_assert!(ab.conj().distance(&ba).unwrap() <= 1e-10 * ab.sup_norm());
        let tr = star_trace_pair(&a, &b).unwrap();
        let direct = a.mul(&b).unwrap().integrate2d();
        prop_assert!((tr - direct).norm() <= 1e-8 * direct.norm());
    }
}
