//! Acceptance battery: one line per criterion, non-zero exit if any fails.

use std::f64::consts::PI;
use std::path::PathBuf;
use std::time::Instant;

use moyal::dynamics::{evolve_step, star_eigen_residual};
use moyal::models::{MorseModel, ShoModel};
use moyal::oracle::{discretize_hamiltonian, eigensolve_lowest, oracle_wigner};
use moyal::poly::{poly_moyal_bracket, poly_poisson_bracket, poly_star, PolySymbol};
use moyal::star::{kernel_star, moyal_bracket, poisson_bracket, StarMethod};
use moyal::susy::{self, ShapeInvariantModel};
use moyal::weyl::overlap;
use moyal::{PhaseGrid, Result, SymbolField};
use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Result<Outcome> {
    Ok(Outcome { pass, detail })
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// `sup |a - reference|` over nodes where `|reference| > 1e-6 peak`, over `sup |reference|`.
fn rel_region(a: &SymbolField, reference: &SymbolField) -> f64 {
    let peak = reference.sup_norm();
    a.values()
        .iter()
        .zip(reference.values())
        .filter(|(_, r)| r.norm() > 1e-6 * peak)
        .map(|(v, r)| (v - r).norm())
        .fold(0.0, f64::max)
        / peak
}

fn canonical_bracket() -> Result<Outcome> {
    let br = poly_moyal_bracket(&PolySymbol::x(), &PolySymbol::p())?;
    let err = br.sub(&PolySymbol::hbar().scale(Complex64::new(0.0, 1.0))).max_coeff();
    let xp = poly_star(&PolySymbol::x(), &PolySymbol::p())?;
    let want = PolySymbol::monomial(c(1.0), 1, 1, 0).add(&PolySymbol::monomial(Complex64::new(0.0, 0.5), 0, 0, 1));
    let err2 = xp.sub(&want).max_coeff();
    outcome(err == 0.0 && err2 == 0.0, format!("[x,p] = {br}; x*p = {xp}; coefficient error {err:e}"))
}

fn groenewold() -> Result<Outcome> {
    let (x, p) = (PolySymbol::x(), PolySymbol::p());
    let (x3, p3) = (x.pow(3)?, p.pow(3)?);
    let (xp2, x2p) = (x.mul(&p.pow(2)?)?, x.pow(2)?.mul(&p)?);
    let quantum = poly_moyal_bracket(&x3, &p3)?
        .add(&poly_moyal_bracket(&xp2, &x2p)?.scale(c(3.0)))
        .div_hbar()?
        .scale(Complex64::new(0.0, -1.0));
    let anomaly = quantum.add(&PolySymbol::monomial(c(3.0), 0, 0, 2)).max_coeff();
    let classical = poly_poisson_bracket(&x3, &p3)?.add(&poly_poisson_bracket(&xp2, &x2p)?.scale(c(3.0)));
    outcome(
        anomaly == 0.0 && classical.is_zero(),
        format!("quantum = {quantum}; Poisson counterpart = {classical}"),
    )
}

fn random_poly(rng: &mut StdRng) -> PolySymbol {
    let mut out = PolySymbol::zero();
    for dx in 0..=4u32 {
        for dp in 0..=(4 - dx) {
            if rng.gen_bool(0.6) {
                let z = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                out = out.add(&PolySymbol::monomial(z, dx, dp, 0));
            }
        }
    }
    out
}

fn rel(diff: &PolySymbol, parts: &[&PolySymbol]) -> f64 {
    let scale = parts.iter().map(|p| p.max_coeff()).fold(f64::MIN_POSITIVE, f64::max);
    diff.max_coeff() / scale
}

fn algebraic_identities() -> Result<Outcome> {
    let mut rng = StdRng::seed_from_u64(0x5eed);
    let mut worst = [0.0f64; 4];
    for _ in 0..100 {
        let (f, g, h) = (random_poly(&mut rng), random_poly(&mut rng), random_poly(&mut rng));
        let fg_h = poly_star(&poly_star(&f, &g)?, &h)?;
        let f_gh = poly_star(&f, &poly_star(&g, &h)?)?;
        worst[0] = worst[0].max(rel(&fg_h.sub(&f_gh), &[&fg_h, &f_gh]));

        let lhs = poly_star(&f, &g)?.conj();
        let rhs = poly_star(&g.conj(), &f.conj())?;
        worst[1] = worst[1].max(rel(&lhs.sub(&rhs), &[&lhs, &rhs]));

        let br = poly_moyal_bracket;
        let j1 = br(&f, &br(&g, &h)?)?;
        let j2 = br(&g, &br(&h, &f)?)?;
        let j3 = br(&h, &br(&f, &g)?)?;
        worst[2] = worst[2].max(rel(&j1.add(&j2).add(&j3), &[&j1, &j2, &j3]));

        let l = br(&f, &poly_star(&g, &h)?)?;
        let r1 = poly_star(&br(&f, &g)?, &h)?;
        let r2 = poly_star(&g, &br(&f, &h)?)?;
        worst[3] = worst[3].max(rel(&l.sub(&r1).sub(&r2), &[&l, &r1, &r2]));
    }
    outcome(
        worst.iter().all(|w| *w <= 1e-12),
        format!(
            "100 triples, degree <= 4: associativity {:.1e}, hermiticity {:.1e}, Jacobi {:.1e}, Leibniz {:.1e}",
            worst[0], worst[1], worst[2], worst[3]
        ),
    )
}

fn sho_tower() -> Result<Outcome> {
    let g = PhaseGrid::new(256, -8.0, 8.0, 1.0)?;
    let model = ShapeInvariantModel::sho(2.0, 1.0)?;
    let seq = susy::build_wigner_sequence(&model, g, 5)?;
    let sho = ShoModel::new(1.0)?;
    let h = sho.hamiltonian(g)?;
    let (mut dist, mut resid, mut ov) = (0.0f64, 0.0f64, 0.0f64);
    for (n, p) in seq.iter().enumerate() {
        dist = dist.max(p.distance(&sho.wigner(n, g)?)?);
        resid = resid.max(star_eigen_residual(&h, p, 2.0 * (n as f64 + 0.5), StarMethod::Kernel)?);
        for (m, q) in seq.iter().enumerate() {
            ov = ov.max((overlap(p, q)? - if m == n { 1.0 } else { 0.0 }).abs());
        }
    }
    outcome(
        dist <= 1e-6 && resid <= 1e-6 && ov <= 1e-7,
        format!("closed-form distance {dist:.1e} (1e-6), star-eigen residual {resid:.1e} (1e-6), overlap defect {ov:.1e} (1e-7)"),
    )
}

fn orthogonality_idempotence() -> Result<Outcome> {
    let g = PhaseGrid::new(512, -16.0, 16.0, 1.0)?;
    let sho = ShoModel::new(1.0)?;
    let states = (0..=5).map(|n| sho.wigner(n, g)).collect::<Result<Vec<_>>>()?;
    let (mut ov, mut idem) = (0.0f64, 0.0f64);
    for (n, p) in states.iter().enumerate() {
        for (m, q) in states.iter().enumerate() {
            ov = ov.max((overlap(p, q)? - if m == n { 1.0 } else { 0.0 }).abs());
        }
        let pp = kernel_star(p, p)?;
        idem = idem.max(pp.distance(&p.scale_real(1.0 / (2.0 * PI)))?);
    }
    outcome(
        ov <= 1e-6 && idem <= 1e-6,
        format!("max |2 pi hbar int P_m P_n - delta| {ov:.1e}, max |P_n * P_n - P_n / 2 pi hbar| {idem:.1e}"),
    )
}

fn morse_oracle(g: PhaseGrid, model: &ShapeInvariantModel) -> Result<Vec<f64>> {
    let h = discretize_hamiltonian(|x| model.v_minus(x, model.a0), g)?;
    Ok(eigensolve_lowest(&h, 5)?.energies)
}

fn morse_spectrum() -> Result<Outcome> {
    let model = ShapeInvariantModel::morse(5.0, 1.0, 1.0, 1.0)?;
    let si = (0..=4).map(|n| susy::si_energy(&model, n)).collect::<Result<Vec<_>>>()?;
    let exact = si.iter().zip([0.0, 9.0, 16.0, 21.0, 24.0]).all(|(a, b)| (a - b).abs() < 1e-12);
    let worst = |or: &[f64]| si.iter().zip(or).map(|(e, o)| (e - o).abs() / e.abs().max(1.0)).fold(0.0, f64::max);
    let or = morse_oracle(PhaseGrid::new(1024, -2.0, 14.0, 1.0)?, &model)?;
    let err = worst(&or);
    let wide = worst(&morse_oracle(PhaseGrid::new(1024, -4.0, 14.0, 1.0)?, &model)?);
    outcome(
        exact && err <= 1e-4,
        format!(
            "SI {si:?}; oracle on [-2,14] {:?}, rel error {err:.1e} (1e-4); on [-4,14] rel error {wide:.1e}",
            or.iter().map(|e| (e * 1e6).round() / 1e6).collect::<Vec<_>>()
        ),
    )
}

fn morse_ground() -> Result<Outcome> {
    let g = PhaseGrid::new(512, -4.0, 14.0, 1.0)?;
    let model = ShapeInvariantModel::morse(5.0, 1.0, 1.0, 1.0)?;
    let closed = MorseModel::new(5.0, 1.0, 1.0)?.ground_wigner(g)?;
    let p0 = susy::ground_wigner(&model, 5.0, g)?;
    let d = rel_region(&closed.field, &p0);
    let ann = susy::annihilation_residual(&model, 5.0, &p0)?;
    let ratio = closed.reference_ratio.map_or("n/a".to_string(), |r| format!("{r:.6}"));
    outcome(
        d <= 1e-4 && ann <= 1e-4,
        format!("closed form vs transform {d:.1e} (1e-4), annihilation {ann:.1e} (1e-4), numerical/textbook C1 = {ratio}"),
    )
}

fn morse_first_excited() -> Result<Outcome> {
    let g = PhaseGrid::new(512, -4.0, 14.0, 1.0)?;
    let model = ShapeInvariantModel::morse(5.0, 1.0, 1.0, 1.0)?;
    let ladder = susy::build_wigner_sequence(&model, g, 1)?.remove(1);
    let textbook = MorseModel::new(5.0, 1.0, 1.0)?.first_excited_wigner(g)?;
    let h = discretize_hamiltonian(|x| model.v_minus(x, model.a0), g)?;
    let oracle = oracle_wigner(&eigensolve_lowest(&h, 2)?, 1)?;
    let d_textbook = ladder.distance(&textbook.field)?;
    let d_oracle = ladder.distance(&oracle)?;
    let resid = star_eigen_residual(&model.h_minus(model.a0, g)?, &ladder, 9.0, StarMethod::Kernel)?;
    let ratio = textbook.reference_ratio.map_or("n/a".to_string(), |r| format!("{r:.6}"));
    outcome(
        d_textbook <= 1e-3 && d_oracle <= 1e-3 && resid <= 1e-3,
        format!(
            "vs textbook form {d_textbook:.1e}, vs oracle {d_oracle:.1e}, star-eigen residual {resid:.1e} (all 1e-3); textbook-constant ratio {ratio}"
        ),
    )
}

fn classical_limit() -> Result<Outcome> {
    let mut pts = Vec::new();
    for (hbar, n) in [(0.01, 2048), (0.02, 1024), (0.05, 512), (0.1, 256)] {
        let g = PhaseGrid::new(n, -5.5, 5.5, hbar)?;
        let a = SymbolField::sample_real(g, |x, p| (-((x - 0.3) / 1.2).powi(2) - ((p + 0.2) / 1.0).powi(2)).exp())?;
        let b = SymbolField::sample_real(g, |x, p| (-((x + 0.4) / 1.3).powi(2) - ((p - 0.3) / 1.1).powi(2)).exp())?;
        let q = moyal_bracket(&a, &b, StarMethod::Kernel)?.scale(Complex64::new(0.0, -1.0 / hbar));
        let err = q.distance(&poisson_bracket(&a, &b)?)?;
        pts.push((hbar, err));
    }
    let lx: Vec<f64> = pts.iter().map(|(h, _)| h.ln()).collect();
    let ly: Vec<f64> = pts.iter().map(|(_, e)| e.ln()).collect();
    let (mx, my) = (lx.iter().sum::<f64>() / 4.0, ly.iter().sum::<f64>() / 4.0);
    let slope = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
        / lx.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
    outcome(
        (slope - 2.0).abs() <= 0.1,
        format!(
            "slope {slope:.4} (2 +- 0.1); errors {}",
            pts.iter().map(|(h, e)| format!("{h}: {e:.2e}")).collect::<Vec<_>>().join(", ")
        ),
    )
}

fn centroid(p: &SymbolField) -> (f64, f64) {
    let g = p.grid();
    let (mut x, mut q) = (0.0, 0.0);
    for i in 0..g.n() {
        for j in 0..g.n() {
            let v = p.get(i, j).re;
            x += g.x(i) * v;
            q += g.p(j) * v;
        }
    }
    let norm = p.integrate2d().re / (g.dx() * g.dp());
    (x / norm, q / norm)
}

fn evolution() -> Result<Outcome> {
    let g = PhaseGrid::new(64, -8.0, 8.0, 1.0)?;
    let sho = ShoModel::new(1.0)?;
    let h = sho.hamiltonian(g)?;
    let model = ShapeInvariantModel::sho(2.0, 1.0)?;
    let mut drift = 0.0f64;
    for p0 in susy::build_wigner_sequence(&model, g, 5)? {
        let mut p = p0.clone();
        for _ in 0..1000 {
            p = evolve_step(&p, &h, 1e-3, StarMethod::Kernel)?;
        }
        drift = drift.max(p.distance(&p0)?);
    }
    let steps = 786;
    let dt = (PI / 4.0) / steps as f64;
    let mut p = SymbolField::sample_real(g, |x, q| (-(x - 1.0).powi(2) - q * q).exp() / PI)?;
    for _ in 0..steps {
        p = evolve_step(&p, &h, dt, StarMethod::Kernel)?;
    }
    let (x, q) = centroid(&p);
    let err = x.abs().max((q + 1.0).abs());
    outcome(
        drift <= 1e-5 && err <= 1e-5,
        format!("stationary drift {drift:.1e} over 1000 steps (1e-5); centroid at t = pi/4 ({x:.2e}, {q:.8}), error {err:.1e} (1e-5)"),
    )
}

fn sign_changes(values: &[f64]) -> usize {
    let peak = values.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let signs: Vec<bool> = values.iter().filter(|v| v.abs() > 1e-12 * peak).map(|v| *v > 0.0).collect();
    signs.windows(2).filter(|w| w[0] != w[1]).count()
}

fn figures() -> Result<Outcome> {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("acceptance_figures");
    let sho_dir = dir.join("sho");
    let morse_dir = dir.join("morse");
    let s = sho_dir.to_string_lossy().into_owned();
    let m = morse_dir.to_string_lossy().into_owned();
    let code_sho = moyal::cli::run(["mf", "wigner", "--model", "sho", "--nmax", "5", "--format", "csv,bin", "--out", &s]);
    let code_morse =
        moyal::cli::run(["mf", "wigner", "--model", "morse", "--nmax", "1", "--format", "csv,bin", "--out", &m]);
    let p5 = SymbolField::load_binary(sho_dir.join("wigner_P5.bin"))?;
    let g = *p5.grid();
    let (i0, j0) = ((0.0 - g.x_min()) / g.dx(), g.n() / 2);
    let i0 = i0.round() as usize;
    let ray: Vec<f64> = (i0..g.n()).map(|i| p5.get(i, j0).re).collect();
    let changes = sign_changes(&ray);
    let csv_rows = std::fs::read_to_string(sho_dir.join("wigner_P5.csv"))?.lines().count();
    let p1 = SymbolField::load_binary(morse_dir.join("wigner_P1.bin"))?;
    let min = p1.values().iter().map(|v| v.re).fold(f64::INFINITY, f64::min);
    outcome(
        code_sho == 0 && code_morse == 0 && changes == 5 && min < 0.0 && csv_rows == g.n() * g.n() + 1,
        format!(
            "exit codes {code_sho}/{code_morse}; P5 sign changes along +x {changes} (5); Morse P1 minimum {min:.3e} (< 0)"
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Result<Outcome>); 11] = [
        ("canonical Moyal bracket", canonical_bracket),
        ("Groenewold anomaly", groenewold),
        ("algebraic identities", algebraic_identities),
        ("SHO Wigner tower", sho_tower),
        ("orthogonality and idempotence", orthogonality_idempotence),
        ("Morse spectrum", morse_spectrum),
        ("Morse ground state", morse_ground),
        ("Morse first excited state", morse_first_excited),
        ("classical limit", classical_limit),
        ("stationarity and evolution", evolution),
        ("figure data", figures),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (pass, detail) = match run() {
            Ok(o) => (o.pass, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failed += 1;
        }
        println!(
            "criterion {:>2} {} {name}: {detail} [{:.1}s]",
            k + 1,
            if pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
