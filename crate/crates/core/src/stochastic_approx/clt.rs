use super::RmDriver;
use crate::error::{Error, Result};
use crate::rng::RngStream;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CltDiagnostics {
    pub var_h: f64,
    /// Slope of `h = E H(., X)` at `theta*`.
    pub h_prime: f64,
    /// Gain `alpha` of the harmonic schedule the diagnostics refer to.
    pub alpha: f64,
    /// Asymptotic variance for gain `alpha`; infinite when not admissible.
    pub sigma_alpha: f64,
    /// `alpha > 1 / (2 h')`.
    pub admissible: bool,
    /// Variance-optimal gain `1 / h'`.
    pub alpha_star: f64,
}

/// `Var(H) alpha^2 / (2 alpha h' - 1)`, infinite outside the admissible range.
pub fn asymptotic_variance(var_h: f64, h_prime: f64, alpha: f64) -> f64 {
    let denom = 2.0 * alpha * h_prime - 1.0;
    if denom > 0.0 {
        var_h * alpha * alpha / denom
    } else {
        f64::INFINITY
    }
}

/// Scalar CLT diagnostics for a driver at `theta_star`, for the schedule
/// `alpha / (b + n)`. The slope is a central difference of the sample mean
/// of `H` with common random numbers and bandwidth `1e-2 (1 + |theta*|)`.
pub fn clt_diagnostics<D: RmDriver + ?Sized>(
    driver: &D,
    theta_star: f64,
    alpha: f64,
    n_samples: usize,
    rng: &mut RngStream,
) -> Result<CltDiagnostics> {
    if driver.dim() != 1 {
        return Err(Error::InvalidParameter("CLT diagnostics are scalar only".into()));
    }
    if n_samples < 2 {
        return Err(Error::InvalidParameter("need at least two samples".into()));
    }
    let bw = 1e-2 * (1.0 + theta_star.abs());
    let (mut mean, mut m2, mut slope) = (0.0, 0.0, 0.0);
    let mut h = [0.0];
    for k in 0..n_samples {
        let xi = driver.innovation(rng);
        driver.h_value(&[theta_star], &xi, &mut h)?;
        let v = h[0];
        let d = v - mean;
        mean += d / (k as f64 + 1.0);
        m2 += d * (v - mean);
        driver.h_value(&[theta_star + bw], &xi, &mut h)?;
        let up = h[0];
        driver.h_value(&[theta_star - bw], &xi, &mut h)?;
        slope += (up - h[0]) / (2.0 * bw);
    }
    let var_h = m2 / (n_samples as f64 - 1.0);
    let h_prime = slope / n_samples as f64;
    if !(h_prime > 0.0) {
        return Err(Error::NonPositiveSlope(h_prime));
    }
    Ok(CltDiagnostics {
        var_h,
        h_prime,
        alpha,
        sigma_alpha: asymptotic_variance(var_h, h_prime, alpha),
        admissible: alpha > 1.0 / (2.0 * h_prime),
        alpha_star: 1.0 / h_prime,
    })
}
