//! Laguerre polynomials and modified Bessel functions of complex order.

use num_complex::Complex64;

use crate::error::{Error, Result};

pub const MAX_LAGUERRE: usize = 64;

/// `L_n(t)` by the recurrence `(k+1) L_{k+1} = (2k+1-t) L_k - k L_{k-1}`.
pub fn laguerre(n: usize, t: f64) -> Result<f64> {
    if n > MAX_LAGUERRE {
        return Err(Error::OutOfRange { index: n, limit: MAX_LAGUERRE });
    }
    let (mut prev, mut cur) = (1.0, 1.0 - t);
    if n == 0 {
        return Ok(prev);
    }
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 - t) * cur - kf * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

const UNDERFLOW: f64 = 745.0;
const REL_TOL: f64 = 1e-10;
const MAX_HALVINGS: usize = 24;

/// Upper limit where `exp(-y (cosh t - 1) + r t)` has dropped below `exp(-745)`.
fn cutoff(y: f64, r: f64) -> f64 {
    let mut t = 1.0f64;
    for _ in 0..60 {
        let next = (1.0 + (UNDERFLOW + r * t) / y).acosh();
        if (next - t).abs() < 1e-12 {
            return next;
        }
        t = next;
    }
    t
}

/// `K_mu(y) = integral_0^inf exp(-y cosh t) cosh(mu t) dt` for complex order and `y > 0`.
///
/// Trapezoid rule on `[0, T]`, halving the step until successive sums agree to `1e-10`
/// relative. When cancellation makes the value tiny compared with the integrand (large
/// imaginary order), agreement to `1e-14` of `integral |integrand|` is accepted instead.
pub fn bessel_k(mu: Complex64, y: f64) -> Result<Complex64> {
    if !(y > 0.0 && y.is_finite()) {
        return Err(Error::Domain(format!("bessel argument y = {y} must be positive")));
    }
    let t_max = cutoff(y, mu.re.abs());
    // exp(-y) is factored out so large arguments do not underflow inside the sum
    let f = |t: f64| (mu * t).cosh() * (-y * (t.cosh() - 1.0)).exp();
    let fa = |t: f64| f(t).norm();

    let mut m = ((t_max * (1.0 + mu.im.abs())) * 4.0).ceil().max(16.0) as usize;
    let mut h = t_max / m as f64;
    let mut sum = 0.5 * (f(0.0) + f(t_max)) + (1..m).map(|k| f(k as f64 * h)).sum::<Complex64>();
    let mut abs = 0.5 * (fa(0.0) + fa(t_max)) + (1..m).map(|k| fa(k as f64 * h)).sum::<f64>();
    let mut est = sum * h;
    for _ in 0..MAX_HALVINGS {
        let mids: Complex64 = (0..m).map(|k| f((k as f64 + 0.5) * h)).sum();
        abs += (0..m).map(|k| fa((k as f64 + 0.5) * h)).sum::<f64>();
        sum += mids;
        m *= 2;
        h /= 2.0;
        let next = sum * h;
        let diff = (next - est).norm();
        est = next;
        if diff <= REL_TOL * next.norm() || diff <= 1e-14 * abs * h {
            return Ok(est * (-y).exp());
        }
    }
    Err(Error::NoConvergence(format!("K_{mu}({y})")))
}

/// `K_{i nu}(y) = integral_0^inf exp(-y cosh t) cos(nu t) dt`, real for real `nu`.
pub fn bessel_k_imag(nu: f64, y: f64) -> Result<f64> {
    if nu.abs() > 200.0 {
        return Err(Error::Domain(format!("|nu| = {} exceeds 200", nu.abs())));
    }
    Ok(bessel_k(Complex64::new(0.0, nu), y)?.re)
}
