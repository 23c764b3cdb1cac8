use rand::Rng;

use super::{Density, StronglyUnimodal};
use crate::rng::RngStream;

/// Standard logistic law `p(x) = e^x / (1 + e^x)^2` on the real line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogisticFamily {
    /// `a = 1 + eta` in the strong unimodality hypothesis.
    pub eta: f64,
    pub delta: f64,
}

impl Default for LogisticFamily {
    fn default() -> Self {
        LogisticFamily { eta: 0.1, delta: 1.0 }
    }
}

impl Density for LogisticFamily {
    fn dim(&self) -> usize {
        1
    }

    fn log_density(&self, x: &[f64]) -> f64 {
        // Symmetric form -|x| - 2 log(1 + e^-|x|) avoids overflow.
        let a = x[0].abs();
        -a - 2.0 * (-a).exp().ln_1p()
    }

    fn grad_log_density(&self, x: &[f64], out: &mut [f64]) {
        out[0] = -(0.5 * x[0]).tanh();
    }

    fn sample(&self, rng: &mut RngStream, out: &mut [f64]) {
        let u: f64 = rng.random_range(f64::MIN_POSITIVE..1.0);
        out[0] = (u / (1.0 - u)).ln();
    }
}

impl StronglyUnimodal for LogisticFamily {
    fn unimodal_constants(&self) -> (f64, f64) {
        (1.0 + self.eta, self.delta)
    }
}
