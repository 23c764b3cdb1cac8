//! Down & In Call pricing with Brownian-bridge conditioning between Euler
//! nodes.

use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::path_engine::{PathModel, PathPayoff};

/// Probability that the Brownian bridge between `x_k` and `x_k1` stays
/// above `barrier` over a step of length `dt` with frozen diffusion `sigma_xk`.
pub fn bridge_survival_prob(x_k: f64, x_k1: f64, barrier: f64, sigma_xk: f64, dt: f64) -> f64 {
    if barrier >= x_k.min(x_k1) {
        return 0.0;
    }
    if sigma_xk <= 0.0 {
        // No diffusion: the path is the straight line, which stays above.
        return 1.0;
    }
    let z = 2.0 * (barrier - x_k) * (barrier - x_k1) / (sigma_xk * sigma_xk * dt);
    // 1 - e^{-z} without cancellation for small z.
    -(-z).exp_m1()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DownInCall {
    pub strike: f64,
    pub barrier: f64,
    pub notional: f64,
    /// Continuously compounded rate used to discount the payoff over the horizon.
    pub rate: f64,
}

impl DownInCall {
    pub fn new(strike: f64, barrier: f64, rate: f64) -> Result<Self> {
        if !(strike > 0.0) || !(barrier > 0.0) {
            return Err(Error::InvalidParameter(format!("need K > 0 and L > 0 (K={strike}, L={barrier})")));
        }
        Ok(DownInCall { strike, barrier, notional: 1.0, rate })
    }

    /// Running survival products `p_bar_k`, `k = 0..=n`, with `p_bar_0 = 1`.
    pub fn survival_products(&self, model: &PathModel, path: &[f64]) -> Vec<f64> {
        let dt = model.dt();
        let mut out = Vec::with_capacity(path.len());
        let mut acc = 1.0;
        out.push(acc);
        for k in 0..path.len() - 1 {
            let s = model.diffusion(model.time(k), &path[..=k]);
            acc *= bridge_survival_prob(path[k], path[k + 1], self.barrier, s, dt);
            out.push(acc);
        }
        out
    }

    fn discounted_call(&self, model: &PathModel, x_t: f64) -> f64 {
        self.notional * (-self.rate * model.horizon).exp() * (x_t - self.strike).max(0.0)
    }

    /// `e^{-rT} (X_T - K)_+ (1 - prod_k p_k)`.
    pub fn preconditioned(&self, model: &PathModel, path: &[f64]) -> f64 {
        let call = self.discounted_call(model, *path.last().expect("non-empty path"));
        if call == 0.0 {
            return 0.0;
        }
        let survive = *self.survival_products(model, path).last().unwrap();
        call * (1.0 - survive)
    }

    /// Discounted payoff using the minimum over grid nodes only.
    pub fn discrete_min(&self, model: &PathModel, path: &[f64]) -> f64 {
        let hit = path.iter().any(|&x| x <= self.barrier);
        if hit {
            self.discounted_call(model, *path.last().unwrap())
        } else {
            0.0
        }
    }
}

impl PathPayoff for DownInCall {
    fn eval(&self, model: &PathModel, path: &[f64]) -> f64 {
        self.preconditioned(model, path)
    }
}

/// Closed-form Black-Scholes Down & In Call for `L <= K`, `L < x0`.
pub fn down_in_call_bs(x0: f64, strike: f64, barrier: f64, rate: f64, sigma: f64, horizon: f64) -> Result<f64> {
    if !(barrier <= strike && barrier < x0 && sigma > 0.0 && horizon > 0.0) {
        return Err(Error::InvalidParameter("closed form needs L <= K, L < x0, sigma > 0, T > 0".into()));
    }
    let n = Normal::standard();
    let sd = sigma * horizon.sqrt();
    let lambda = (rate + 0.5 * sigma * sigma) / (sigma * sigma);
    let y = (barrier * barrier / (x0 * strike)).ln() / sd + lambda * sd;
    let ratio = barrier / x0;
    Ok(x0 * ratio.powf(2.0 * lambda) * n.cdf(y)
        - strike * (-rate * horizon).exp() * ratio.powf(2.0 * lambda - 2.0) * n.cdf(y - sd))
}
