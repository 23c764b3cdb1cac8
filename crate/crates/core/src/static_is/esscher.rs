use super::{dot, GradientSample, Payoff};
use crate::distributions::EsscherFamily;
use crate::error::Result;
use crate::mc_estimator::IsEstimand;
use crate::rng::RngStream;
use crate::stochastic_approx::{norm, RmDriver, Sampler};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EsscherVariant {
    /// Normalizer `e^{-(lambda/2) sqrt(d) |grad psi(-theta)|}`.
    #[default]
    Theorem,
    /// Normalizer `e^{-|theta|}`.
    Numeric,
}

/// Esscher driver `H(theta, x) = N(theta) F^2(x) (grad psi(theta) - x)`
/// evaluated at `x` drawn from the tilt by `-theta`.
#[derive(Debug, Clone)]
pub struct EsscherDriver<E, P> {
    pub family: E,
    pub payoff: P,
    /// Growth rate of `F`, used by the theorem normalizer.
    pub lambda: f64,
    pub variant: EsscherVariant,
}

/// `e^{-<theta, x> + psi(theta)}` for `x` drawn from the tilt by `theta`.
pub fn is_weight_esscher<E: EsscherFamily + ?Sized>(family: &E, theta: &[f64], x: &[f64]) -> Result<f64> {
    Ok((family.cgf(theta)? - dot(theta, x)).exp())
}

impl<E: EsscherFamily, P: Payoff> EsscherDriver<E, P> {
    pub fn new(family: E, payoff: P, lambda: f64, variant: EsscherVariant) -> Self {
        EsscherDriver { family, payoff, lambda, variant }
    }

    fn neg(theta: &[f64]) -> Vec<f64> {
        theta.iter().map(|t| -t).collect()
    }

    /// Writes `grad psi(theta) - x` into `out` and returns `(F(x), x)`.
    fn core(&self, theta: &[f64], xi: &E::Innovation, out: &mut [f64]) -> Result<(f64, Vec<f64>)> {
        let d = self.family.dim();
        let mut x = vec![0.0; d];
        self.family.tilted(&Self::neg(theta), xi, &mut x)?;
        self.family.cgf_grad(theta, out)?;
        for (o, xv) in out.iter_mut().zip(&x) {
            *o -= xv;
        }
        Ok((self.payoff.eval(&x), x))
    }
}

impl<E: EsscherFamily, P: Payoff> Sampler for EsscherDriver<E, P> {
    type Innovation = E::Innovation;
    fn dim(&self) -> usize {
        self.family.dim()
    }
    fn innovation(&self, rng: &mut RngStream) -> E::Innovation {
        self.family.innovation(rng)
    }
}

impl<E: EsscherFamily, P: Payoff> RmDriver for EsscherDriver<E, P> {
    fn h_value(&self, theta: &[f64], xi: &E::Innovation, out: &mut [f64]) -> Result<()> {
        let log_norm = match self.variant {
            EsscherVariant::Theorem => {
                let d = self.family.dim();
                let mut g = vec![0.0; d];
                self.family.cgf_grad(&Self::neg(theta), &mut g)?;
                -0.5 * self.lambda * (d as f64).sqrt() * norm(&g)
            }
            EsscherVariant::Numeric => -norm(theta),
        };
        let (f, _) = self.core(theta, xi, out)?;
        let scale = log_norm.exp() * f * f;
        out.iter_mut().for_each(|o| *o *= scale);
        Ok(())
    }
}

impl<E: EsscherFamily, P: Payoff> GradientSample for EsscherDriver<E, P> {
    fn grad_v_sample(&self, theta: &[f64], xi: &E::Innovation, out: &mut [f64]) -> Result<()> {
        let (f, _) = self.core(theta, xi, out)?;
        // e^{-<theta,x>} p(x) = e^{psi(-theta)} p_{-theta}(x).
        let scale = (self.family.cgf(theta)? + self.family.cgf(&Self::neg(theta))?).exp() * f * f;
        out.iter_mut().for_each(|o| *o *= scale);
        Ok(())
    }
}

impl<E: EsscherFamily, P: Payoff> IsEstimand for EsscherDriver<E, P> {
    fn weighted_payoff(&self, theta: &[f64], xi: &E::Innovation) -> Result<f64> {
        let mut x = vec![0.0; self.family.dim()];
        self.family.tilted(theta, xi, &mut x)?;
        let psi = self.family.cgf(theta)?;
        let (log_f, sign) = self.payoff.log_abs(&x);
        if sign == 0.0 {
            return Ok(0.0);
        }
        Ok(sign * (log_f + psi - dot(theta, &x)).exp())
    }

    fn v_sample(&self, theta: &[f64], xi: &E::Innovation) -> Result<f64> {
        let zero = vec![0.0; self.family.dim()];
        let mut x = vec![0.0; self.family.dim()];
        self.family.tilted(&zero, xi, &mut x)?;
        let psi = self.family.cgf(theta)?;
        let (log_f, sign) = self.payoff.log_abs(&x);
        if sign == 0.0 {
            return Ok(0.0);
        }
        Ok((2.0 * log_f + psi - dot(theta, &x)).exp())
    }
}
