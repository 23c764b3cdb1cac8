//! Modified Bessel functions of the second kind, integer orders 0..=2.
//!
//! Power series around the origin for `x <= 2`, Steed's continued fraction
//! (Temme's CF2 form) above. Both give close to full double precision.

use crate::error::{Error, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const SERIES_CUTOFF: f64 = 2.0;
const EPS: f64 = 1e-17;
const MAX_TERMS: usize = 10_000;

/// `K_order(x)` for `order` in `{0, 1, 2}` and `x > 0`.
pub fn bessel_k(order: u32, x: f64) -> Result<f64> {
    Ok(bessel_k_scaled(order, x)? * (-x).exp())
}

/// `e^x K_order(x)`; does not underflow for large `x`.
pub fn bessel_k_scaled(order: u32, x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain("bessel_k", format!("x must be positive and finite, got {x}")));
    }
    let (k0, k1) = k01_scaled(x);
    match order {
        0 => Ok(k0),
        1 => Ok(k1),
        2 => Ok(k0 + 2.0 / x * k1),
        _ => Err(Error::domain("bessel_k", format!("order must be 0, 1 or 2, got {order}"))),
    }
}

/// `(e^x K_0(x), e^x K_1(x))`.
pub(crate) fn k01_scaled(x: f64) -> (f64, f64) {
    if x <= SERIES_CUTOFF {
        let (k0, k1) = k01_series(x);
        let s = x.exp();
        (k0 * s, k1 * s)
    } else {
        k01_steed_scaled(x)
    }
}

fn k01_series(x: f64) -> (f64, f64) {
    let t = 0.25 * x * x;
    let ln_half = (0.5 * x).ln();

    // I_0, I_1 and the digamma-weighted sums in a single pass.
    let mut i0 = 0.0;
    let mut i1 = 0.0;
    let mut s0 = 0.0;
    let mut s1 = 0.0;
    let mut term0 = 1.0; // t^k / (k!)^2
    let mut term1 = 1.0; // t^k / (k! (k+1)!)
    let mut psi_k1 = -EULER_GAMMA; // psi(k+1)
    for k in 0..MAX_TERMS {
        let psi_k2 = psi_k1 + 1.0 / (k as f64 + 1.0);
        i0 += term0;
        i1 += term1;
        s0 += psi_k1 * term0;
        s1 += (psi_k1 + psi_k2) * term1;
        let kf = k as f64 + 1.0;
        term0 *= t / (kf * kf);
        term1 *= t / (kf * (kf + 1.0));
        psi_k1 = psi_k2;
        if term0 < EPS * i0.abs() && term1 < EPS * i1.abs() {
            break;
        }
    }
    let i1 = 0.5 * x * i1;
    let k0 = -ln_half * i0 + s0;
    let k1 = 1.0 / x + ln_half * i1 - 0.25 * x * s1;
    (k0, k1)
}

fn k01_steed_scaled(x: f64) -> (f64, f64) {
    // Order mu = 0; returns K_0 and K_1 = K_0 (0.5 + x - h) / x.
    let a1 = 0.25;
    let mut b = 2.0 * (1.0 + x);
    let mut d = 1.0 / b;
    let mut h = d;
    let mut delh = d;
    let mut q1 = 0.0;
    let mut q2 = 1.0;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    for i in 1..MAX_TERMS {
        let fi = i as f64;
        a -= 2.0 * fi;
        c = -a * c / (fi + 1.0);
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh = (b * d - 1.0) * delh;
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < EPS {
            break;
        }
    }
    let h = a1 * h;
    let k0 = (std::f64::consts::PI / (2.0 * x)).sqrt() / s;
    let k1 = k0 * (x + 0.5 - h) / x;
    (k0, k1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::integrate;

    /// K_nu(x) = int_0^inf exp(-x cosh t) cosh(nu t) dt, truncated where the
    /// integrand drops below e^-745 of its peak.
    fn k_by_quadrature(nu: f64, x: f64) -> f64 {
        let upper = (1.0 + 745.0 / x).acosh() + 1.0;
        integrate(|t| (-x * t.cosh()).exp() * (nu * t).cosh(), 0.0, upper, 1e-300, 1e-14).0
    }

    #[test]
    fn matches_integral_representation() {
        for &x in &[0.05, 0.3, 0.5, 1.0, 1.9, 2.0, 2.1, 3.0, 5.0, 10.0, 25.0, 60.0] {
            for order in 0..=2 {
                let oracle = k_by_quadrature(order as f64, x);
                let got = bessel_k(order, x).unwrap();
                let rel = (got - oracle).abs() / oracle;
                assert!(rel < 1e-10, "K_{order}({x}) = {got}, oracle {oracle}, rel {rel}");
            }
        }
    }

    #[test]
    fn k1_at_one() {
        let oracle = k_by_quadrature(1.0, 1.0);
        assert!((bessel_k(1, 1.0).unwrap() - oracle).abs() / oracle < 1e-10);
        assert!((oracle - 0.601_907_230_197_234_6).abs() < 1e-12);
    }

    #[test]
    fn recurrence_against_oracle() {
        for &x in &[0.5, 1.0, 5.0] {
            let k0 = k_by_quadrature(0.0, x);
            let k1 = k_by_quadrature(1.0, x);
            let k2 = bessel_k(2, x).unwrap();
            assert!((k2 - (k0 + 2.0 / x * k1)).abs() / k2 < 1e-10);
        }
    }

    #[test]
    fn large_argument_asymptote() {
        let mut last = f64::INFINITY;
        for &x in &[50.0, 200.0, 1e3, 1e4, 1e5] {
            let asym = (std::f64::consts::PI / (2.0 * x)).sqrt();
            let ratio = bessel_k_scaled(1, x).unwrap() / asym;
            assert!((ratio - 1.0).abs() < last);
            last = (ratio - 1.0).abs();
        }
        assert!(last < 1e-4);
    }

    #[test]
    fn domain_errors() {
        assert!(bessel_k(1, 0.0).is_err());
        assert!(bessel_k(1, -1.0).is_err());
        assert!(bessel_k(3, 1.0).is_err());
        assert!(bessel_k(1, f64::NAN).is_err());
    }
}
