//! Densities, samplers, log-density gradients and cumulant generating
//! functions for the Gaussian, normal inverse Gaussian and logistic laws.

mod bessel;
mod gaussian;
mod logistic;
mod nig;

pub use bessel::{bessel_k, bessel_k_scaled};
pub use gaussian::{gaussian_grad_log, GaussianFamily};
pub use logistic::LogisticFamily;
pub use nig::{NigInnovation, NigParams, NigVector};

use crate::error::Result;
use crate::rng::RngStream;

/// A sampleable, everywhere positive density on `R^d`.
pub trait Density: Send + Sync {
    fn dim(&self) -> usize;
    fn log_density(&self, x: &[f64]) -> f64;
    /// `grad p / p` at `x`.
    fn grad_log_density(&self, x: &[f64], out: &mut [f64]);
    fn sample(&self, rng: &mut RngStream, out: &mut [f64]);

    fn density(&self, x: &[f64]) -> f64 {
        self.log_density(x).exp()
    }
}

/// Strongly unimodal density: `log p(x) + delta |x|^a` is convex for the
/// returned `(a, delta)`. This controls the translation weight
/// `p(x-t)^2 / (p(x) p(x-2t)) <= exp(2 delta |t|^a)`.
pub trait StronglyUnimodal: Density {
    fn unimodal_constants(&self) -> (f64, f64);

    /// Upper bound on `log(p^2(x-t) / (p(x) p(x-2t)))` over `x`.
    fn log_weight_bound(&self, t: &[f64]) -> f64 {
        let (a, delta) = self.unimodal_constants();
        2.0 * delta * t.iter().map(|v| v * v).sum::<f64>().sqrt().powf(a)
    }
}

/// A family whose exponential tilts `p_t(x) = exp(<t,x> - psi(t)) p(x)` can
/// be simulated from a fixed innovation: `X^(t) = g(t, xi)`.
pub trait EsscherFamily: Send + Sync {
    type Innovation: Send;

    fn dim(&self) -> usize;
    /// Cumulant generating function `psi(t) = log E exp(<t, X>)`.
    fn cgf(&self, theta: &[f64]) -> Result<f64>;
    fn cgf_grad(&self, theta: &[f64], out: &mut [f64]) -> Result<()>;
    fn innovation(&self, rng: &mut RngStream) -> Self::Innovation;
    /// Writes `X^(theta) = g(theta, xi)` into `out`.
    fn tilted(&self, theta: &[f64], xi: &Self::Innovation, out: &mut [f64]) -> Result<()>;
}
