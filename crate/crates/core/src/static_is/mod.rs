//! Importance-sampling drivers for finite-dimensional laws: mean
//! translation of a strongly unimodal density and the Esscher transform.

mod esscher;
mod payoff;
mod translation;

pub use esscher::{is_weight_esscher, EsscherDriver, EsscherVariant};
pub use payoff::{CallPayoff, ConstantPayoff, ExpPayoff, GrowthEnvelope, Payoff, SparkSpread};
pub use translation::{
    is_weight_translation, naive_h_epsilon, translation_h_gaussian, GaussianTranslation, NaiveGaussianDriver,
    TranslationDriver, TranslationVariant,
};

use crate::error::{Error, Result};
use crate::mc_estimator::{chunked_moments, IsEstimand};
use crate::rng::RngStream;
use crate::stochastic_approx::Sampler;

/// Unbiased sample of `grad V(theta)` built from one innovation; used to
/// check that a driver's mean points along the true gradient.
pub trait GradientSample: Sampler {
    fn grad_v_sample(&self, theta: &[f64], xi: &Self::Innovation, out: &mut [f64]) -> Result<()>;
}

/// Monte Carlo estimate of `V(theta)` and its standard error, from
/// unshifted draws. Same `seed` gives common random numbers across `theta`.
pub fn estimate_v<E: IsEstimand + ?Sized>(estimand: &E, theta: &[f64], n: usize, seed: u64) -> Result<(f64, f64)> {
    if n < 2 {
        return Err(Error::InvalidParameter("estimate_v needs n >= 2".into()));
    }
    let m = chunked_moments(n, seed, |rng: &mut RngStream| {
        let xi = estimand.innovation(rng);
        estimand.v_sample(theta, &xi)
    })?;
    Ok((m.mean(), m.std_error()))
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
