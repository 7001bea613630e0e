//! Exact Moyal products of polynomial symbols, with `hbar` kept symbolic.

use moyal::poly::{poly_moyal_bracket, poly_poisson_bracket, poly_star, PolySymbol};
use moyal::Result;
use num_complex::Complex64;

fn main() -> Result<()> {
    let (x, p) = (PolySymbol::x(), PolySymbol::p());

    println!("x * p      = {}", poly_star(&x, &p)?);
    println!("p * x      = {}", poly_star(&p, &x)?);
    println!("[x, p]     = {}", poly_moyal_bracket(&x, &p)?);

    let h = x.pow(2)?.add(&p.pow(2)?);
    println!("H * H      = {}", poly_star(&h, &h)?);

    // Cubic symbols break the correspondence between Moyal and Poisson brackets.
    let (x3, p3) = (x.pow(3)?, p.pow(3)?);
    let (xp2, x2p) = (x.mul(&p.pow(2)?)?, x.pow(2)?.mul(&p)?);
    let three = Complex64::new(3.0, 0.0);
    let quantum = poly_moyal_bracket(&x3, &p3)?
        .add(&poly_moyal_bracket(&xp2, &x2p)?.scale(three))
        .div_hbar()?
        .scale(Complex64::new(0.0, -1.0));
    let classical = poly_poisson_bracket(&x3, &p3)?.add(&poly_poisson_bracket(&xp2, &x2p)?.scale(three));
    println!("{{x^3,p^3}}_M + 3{{xp^2,x^2p}}_M = {quantum}");
    println!("{{x^3,p^3}}_P + 3{{xp^2,x^2p}}_P = {classical}");

    let at_half = quantum.at_hbar(0.5);
    println!("at hbar = 1/2: {at_half}");
    Ok(())
}
