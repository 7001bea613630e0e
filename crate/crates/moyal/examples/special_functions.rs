use moyal::special::{bessel_k, bessel_k_imag, laguerre};
use moyal::Result;
use num_complex::Complex64;

fn main() -> Result<()> {
    println!("Laguerre L_n(t)");
    for t in [0.0, 1.0, 4.0, 10.0] {
        let row: Vec<String> = (0..6).map(|n| laguerre(n, t).map(|v| format!("{v:10.4}"))).collect::<Result<_>>()?;
        println!("  t = {t:4}: {}", row.join(""));
    }

    println!("K_{{i nu}}(y), real for real nu");
    for nu in [0.0, 2.0, 10.0] {
        let row: Vec<String> = [0.5, 2.0, 8.0]
            .iter()
            .map(|&y| bessel_k_imag(nu, y).map(|v| format!("{v:14.6e}")))
            .collect::<Result<_>>()?;
        println!("  nu = {nu:4}: {}", row.join(""));
    }

    // half-integer order has a closed form: K_{1/2}(y) = sqrt(pi / 2y) e^{-y}
    let y = 1.5;
    let k = bessel_k(Complex64::new(0.5, 0.0), y)?;
    let exact = (std::f64::consts::PI / (2.0 * y)).sqrt() * (-y).exp();
    println!("K_1/2(1.5) = {:.12} (closed form {exact:.12})", k.re);
    Ok(())
}
