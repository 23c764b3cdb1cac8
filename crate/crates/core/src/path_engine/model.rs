use std::fmt::Debug;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Scalar SDE coefficients `b(t, X^t)`, `sigma(t, X^t)`. The path slice
/// ends at the current state, so stopped-path functionals are possible.
pub trait Sde: Send + Sync + Debug {
    fn drift(&self, t: f64, path: &[f64]) -> f64;
    fn diffusion(&self, t: f64, path: &[f64]) -> f64;
    /// `Some(sup |sigma|)` when the diffusion is bounded.
    fn diffusion_bound(&self) -> Option<f64> {
        None
    }
}

/// `dX = r X dt + sigma X dW`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlackScholes {
    pub r: f64,
    pub sigma: f64,
}

impl Sde for BlackScholes {
    fn drift(&self, _: f64, path: &[f64]) -> f64 {
        self.r * path[path.len() - 1]
    }
    fn diffusion(&self, _: f64, path: &[f64]) -> f64 {
        self.sigma * path[path.len() - 1]
    }
}

/// `dX = r X dt + sigma X^beta X / sqrt(1 + X^2) dW`; the diffusion is set
/// to zero for `X <= 0`, where the power is undefined.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalVol {
    pub r: f64,
    pub sigma: f64,
    pub beta: f64,
}

impl Sde for LocalVol {
    fn drift(&self, _: f64, path: &[f64]) -> f64 {
        self.r * path[path.len() - 1]
    }
    fn diffusion(&self, _: f64, path: &[f64]) -> f64 {
        let x = path[path.len() - 1];
        if x <= 0.0 {
            0.0
        } else {
            self.sigma * x.powf(self.beta) * x / (1.0 + x * x).sqrt()
        }
    }
}

#[derive(Debug, Clone)]
pub struct PathModel {
    pub sde: Arc<dyn Sde>,
    pub x0: f64,
    pub horizon: f64,
    pub n_steps: usize,
}

impl PathModel {
    pub fn new(sde: Arc<dyn Sde>, x0: f64, horizon: f64, n_steps: usize) -> Result<Self> {
        if !(horizon > 0.0) || n_steps == 0 || !x0.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "path model needs T > 0, n >= 1, finite x0 (T={horizon}, n={n_steps}, x0={x0})"
            )));
        }
        Ok(PathModel { sde, x0, horizon, n_steps })
    }

    pub fn black_scholes(r: f64, sigma: f64, x0: f64, horizon: f64, n_steps: usize) -> Result<Self> {
        Self::new(Arc::new(BlackScholes { r, sigma }), x0, horizon, n_steps)
    }

    pub fn local_vol(r: f64, sigma: f64, beta: f64, x0: f64, horizon: f64, n_steps: usize) -> Result<Self> {
        Self::new(Arc::new(LocalVol { r, sigma, beta }), x0, horizon, n_steps)
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.n_steps as f64
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.dt()
    }

    pub fn drift(&self, t: f64, path: &[f64]) -> f64 {
        self.sde.drift(t, path)
    }

    pub fn diffusion(&self, t: f64, path: &[f64]) -> f64 {
        self.sde.diffusion(t, path)
    }

    pub fn sigma_bounded(&self) -> bool {
        self.sde.diffusion_bound().is_some()
    }
}
