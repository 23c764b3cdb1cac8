use super::{dot, GradientSample, GrowthEnvelope, Payoff};
use crate::distributions::{Density, GaussianFamily, StronglyUnimodal};
use crate::error::{Error, Result};
use crate::mc_estimator::IsEstimand;
use crate::rng::RngStream;
use crate::stochastic_approx::{norm, RmDriver, Sampler};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TranslationVariant {
    /// Payoff factor `F^2(x - theta)` and normalizer
    /// `e^{-2 delta |theta|^a} / (1 + F~(-theta)^{2c})`.
    #[default]
    Theorem,
    /// Payoff factor `F^2(x)` and normalizer `e^{-2|theta|}`.
    Pseudocode,
}

/// Mean-translation driver for a strongly unimodal density `p`:
/// `H(theta, x) = N(theta) F^2(.) p^2(x-theta) / (p(x) p(x-2theta)) * grad log p(x-2theta)`.
#[derive(Debug, Clone)]
pub struct TranslationDriver<D, P> {
    pub family: D,
    pub payoff: P,
    pub envelope: GrowthEnvelope,
    pub variant: TranslationVariant,
}

fn shifted(x: &[f64], theta: &[f64], k: f64) -> Vec<f64> {
    x.iter().zip(theta).map(|(a, t)| a + k * t).collect()
}

fn finite_log_density<D: Density + ?Sized>(family: &D, theta: &[f64], at: &[f64]) -> Result<f64> {
    let l = family.log_density(at);
    if l.is_finite() {
        Ok(l)
    } else {
        Err(Error::Underflow { theta: theta.to_vec(), x: at.to_vec() })
    }
}

/// `p(x + theta) / p(x)`; the matching payoff evaluation is `F(x + theta)`.
pub fn is_weight_translation<D: Density + ?Sized>(family: &D, theta: &[f64], x: &[f64]) -> Result<f64> {
    let up = finite_log_density(family, theta, &shifted(x, theta, 1.0))?;
    let base = finite_log_density(family, theta, x)?;
    Ok((up - base).exp())
}

impl<D: StronglyUnimodal, P: Payoff> TranslationDriver<D, P> {
    pub fn new(family: D, payoff: P, envelope: GrowthEnvelope, variant: TranslationVariant) -> Self {
        TranslationDriver { family, payoff, envelope, variant }
    }

    /// `log(p^2(x-theta) / (p(x) p(x-2theta)))` and `grad log p(x - 2theta)`.
    fn weight_and_score(&self, theta: &[f64], x: &[f64], score: &mut [f64]) -> Result<f64> {
        let x1 = shifted(x, theta, -1.0);
        let x2 = shifted(x, theta, -2.0);
        let l0 = finite_log_density(&self.family, theta, x)?;
        let l1 = finite_log_density(&self.family, theta, &x1)?;
        let l2 = finite_log_density(&self.family, theta, &x2)?;
        self.family.grad_log_density(&x2, score);
        Ok(2.0 * l1 - l0 - l2)
    }

    /// The weight `p^2(x-theta)/(p(x)p(x-2theta))`, exposed for bound checks.
    pub fn translation_weight(&self, theta: &[f64], x: &[f64]) -> Result<f64> {
        let mut score = vec![0.0; x.len()];
        Ok(self.weight_and_score(theta, x, &mut score)?.exp())
    }

    fn log_normalizer(&self, theta: &[f64]) -> f64 {
        match self.variant {
            TranslationVariant::Theorem => {
                self.envelope.log_normalizer(theta) - self.family.log_weight_bound(theta)
            }
            TranslationVariant::Pseudocode => -2.0 * norm(theta),
        }
    }
}

impl<D: StronglyUnimodal, P: Payoff> Sampler for TranslationDriver<D, P> {
    type Innovation = Vec<f64>;
    fn dim(&self) -> usize {
        self.family.dim()
    }
    fn innovation(&self, rng: &mut RngStream) -> Vec<f64> {
        let mut x = vec![0.0; self.family.dim()];
        self.family.sample(rng, &mut x);
        x
    }
}

impl<D: StronglyUnimodal, P: Payoff> RmDriver for TranslationDriver<D, P> {
    fn h_value(&self, theta: &[f64], x: &Vec<f64>, out: &mut [f64]) -> Result<()> {
        let f = match self.variant {
            TranslationVariant::Theorem => self.payoff.eval(&shifted(x, theta, -1.0)),
            TranslationVariant::Pseudocode => self.payoff.eval(x),
        };
        if f == 0.0 {
            out.fill(0.0);
            return Ok(());
        }
        let log_w = self.weight_and_score(theta, x, out)?;
        let scale = (2.0 * f.abs().ln() + self.log_normalizer(theta) + log_w).exp();
        out.iter_mut().for_each(|o| *o *= scale);
        Ok(())
    }
}

impl<D: StronglyUnimodal, P: Payoff> GradientSample for TranslationDriver<D, P> {
    fn grad_v_sample(&self, theta: &[f64], x: &Vec<f64>, out: &mut [f64]) -> Result<()> {
        let f = self.payoff.eval(&shifted(x, theta, -1.0));
        if f == 0.0 {
            out.fill(0.0);
            return Ok(());
        }
        let log_w = self.weight_and_score(theta, x, out)?;
        let scale = (2.0 * f.abs().ln() + log_w).exp();
        out.iter_mut().for_each(|o| *o *= scale);
        Ok(())
    }
}

impl<D: StronglyUnimodal, P: Payoff> IsEstimand for TranslationDriver<D, P> {
    fn weighted_payoff(&self, theta: &[f64], x: &Vec<f64>) -> Result<f64> {
        let up = shifted(x, theta, 1.0);
        let (log_f, sign) = self.payoff.log_abs(&up);
        if sign == 0.0 {
            return Ok(0.0);
        }
        let l_up = finite_log_density(&self.family, theta, &up)?;
        let l0 = finite_log_density(&self.family, theta, x)?;
        Ok(sign * (log_f + l_up - l0).exp())
    }

    fn v_sample(&self, theta: &[f64], x: &Vec<f64>) -> Result<f64> {
        let (log_f, sign) = self.payoff.log_abs(x);
        if sign == 0.0 {
            return Ok(0.0);
        }
        let l0 = finite_log_density(&self.family, theta, x)?;
        let l1 = finite_log_density(&self.family, theta, &shifted(x, theta, -1.0))?;
        Ok((2.0 * log_f + l0 - l1).exp())
    }
}

/// `e^{-(lambda/2)|theta|^b} F^2(x - theta) (2 theta - x)`.
pub fn translation_h_gaussian<P: Payoff + ?Sized>(theta: &[f64], x: &[f64], payoff: &P, lambda: f64, b: f64, out: &mut [f64]) {
    let f = payoff.eval(&shifted(x, theta, -1.0));
    let scale = (-0.5 * lambda * norm(theta).powf(b)).exp() * f * f;
    for ((o, &t), &xi) in out.iter_mut().zip(theta).zip(x) {
        *o = scale * (2.0 * t - xi);
    }
}

/// `e^{-(3/2+eps)|theta|^2} F^2(x) e^{|theta|^2/2 - <theta,x>} (theta - x)`.
pub fn naive_h_epsilon<P: Payoff + ?Sized>(theta: &[f64], x: &[f64], payoff: &P, epsilon: f64, out: &mut [f64]) {
    let f = payoff.eval(x);
    let t2 = dot(theta, theta);
    let scale = if f == 0.0 {
        0.0
    } else {
        (2.0 * f.abs().ln() - (1.0 + epsilon) * t2 - dot(theta, x)).exp()
    };
    for ((o, &t), &xi) in out.iter_mut().zip(theta).zip(x) {
        *o = scale * (t - xi);
    }
}

/// Gaussian translation in its simple closed form; `F^2 <= C e^{(lambda/2)|x|^b}`
/// is what keeps the iterates from exploding.
#[derive(Debug, Clone)]
pub struct GaussianTranslation<P> {
    pub family: GaussianFamily,
    pub payoff: P,
    pub lambda: f64,
    pub b: f64,
}

impl<P: Payoff> GaussianTranslation<P> {
    pub fn new(dim: usize, payoff: P, lambda: f64, b: f64) -> Self {
        GaussianTranslation { family: GaussianFamily::new(dim), payoff, lambda, b }
    }
}

fn gaussian_innovation(family: &GaussianFamily, rng: &mut RngStream) -> Vec<f64> {
    let mut x = vec![0.0; family.dim];
    family.sample(rng, &mut x);
    x
}

impl<P: Payoff> Sampler for GaussianTranslation<P> {
    type Innovation = Vec<f64>;
    fn dim(&self) -> usize {
        self.family.dim
    }
    fn innovation(&self, rng: &mut RngStream) -> Vec<f64> {
        gaussian_innovation(&self.family, rng)
    }
}

impl<P: Payoff> RmDriver for GaussianTranslation<P> {
    fn h_value(&self, theta: &[f64], x: &Vec<f64>, out: &mut [f64]) -> Result<()> {
        translation_h_gaussian(theta, x, &self.payoff, self.lambda, self.b, out);
        Ok(())
    }
}

impl<P: Payoff> GradientSample for GaussianTranslation<P> {
    fn grad_v_sample(&self, theta: &[f64], x: &Vec<f64>, out: &mut [f64]) -> Result<()> {
        translation_h_gaussian(theta, x, &self.payoff, 0.0, 1.0, out);
        let e = dot(theta, theta).exp();
        out.iter_mut().for_each(|o| *o *= e);
        Ok(())
    }
}

impl<P: Payoff> IsEstimand for GaussianTranslation<P> {
    fn weighted_payoff(&self, theta: &[f64], x: &Vec<f64>) -> Result<f64> {
        let f = self.payoff.eval(&shifted(x, theta, 1.0));
        Ok(f * (-dot(theta, x) - 0.5 * dot(theta, theta)).exp())
    }

    fn v_sample(&self, theta: &[f64], x: &Vec<f64>) -> Result<f64> {
        let f = self.payoff.eval(x);
        Ok(f * f * (-dot(theta, x) + 0.5 * dot(theta, theta)).exp())
    }
}

/// Rescaled naive Gaussian driver, a baseline that freezes far from the optimum.
#[derive(Debug, Clone)]
pub struct NaiveGaussianDriver<P> {
    pub family: GaussianFamily,
    pub payoff: P,
    pub epsilon: f64,
}

impl<P: Payoff> NaiveGaussianDriver<P> {
    pub fn new(dim: usize, payoff: P, epsilon: f64) -> Self {
        NaiveGaussianDriver { family: GaussianFamily::new(dim), payoff, epsilon }
    }
}

impl<P: Payoff> Sampler for NaiveGaussianDriver<P> {
    type Innovation = Vec<f64>;
    fn dim(&self) -> usize {
        self.family.dim
    }
    fn innovation(&self, rng: &mut RngStream) -> Vec<f64> {
        gaussian_innovation(&self.family, rng)
    }
}

impl<P: Payoff> RmDriver for NaiveGaussianDriver<P> {
    fn h_value(&self, theta: &[f64], x: &Vec<f64>, out: &mut [f64]) -> Result<()> {
        naive_h_epsilon(theta, x, &self.payoff, self.epsilon, out);
        Ok(())
    }
}
