//! Path-dependent SDEs on an Euler grid, Girsanov drift shifts driven by
//! `Theta_t = phi(t, X^t) theta(t)`, and the functional Robbins-Monro driver.

mod basis;
mod model;

pub use basis::{basis_eval, BasisGrid, BasisKind, BasisSpec};
pub use model::{BlackScholes, LocalVol, PathModel, Sde};

use std::io::Write;

use rand_distr::{Distribution, StandardNormal};

use crate::barrier::bridge_survival_prob;
use crate::error::{Error, Result};
use crate::mc_estimator::IsEstimand;
use crate::rng::RngStream;
use crate::static_is::GradientSample;
use crate::stochastic_approx::{norm, RmDriver, Sampler};

/// A payoff functional of the discretised path `X_{t_0}, ..., X_{t_n}`.
pub trait PathPayoff: Send + Sync {
    fn eval(&self, model: &PathModel, path: &[f64]) -> f64;
}

impl<F: Fn(&PathModel, &[f64]) -> f64 + Send + Sync> PathPayoff for F {
    fn eval(&self, model: &PathModel, path: &[f64]) -> f64 {
        self(model, path)
    }
}

/// The driver `phi(t, X^t)`, a `1 x p` row since the shipped models are scalar.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DriverPhi {
    /// `phi = 1`, `p = 1`.
    Identity,
    /// `phi_k = (p_bar_k, 1 - p_bar_k)` with `p_bar_k` the bridge survival
    /// probability of the path up to `t_k`.
    BarrierSurvival { barrier: f64 },
}

impl DriverPhi {
    pub fn components(&self) -> usize {
        match self {
            DriverPhi::Identity => 1,
            DriverPhi::BarrierSurvival { .. } => 2,
        }
    }

    /// Bound on the Euclidean norm of `phi`.
    pub fn sup_norm(&self) -> f64 {
        1.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shift {
    None,
    /// Drift `b - sigma Theta`.
    Minus,
    /// Drift `b + sigma Theta`.
    Plus,
}

/// A simulated Euler path together with the quantities the drivers need.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedPath {
    /// `X_{t_0..t_n}`.
    pub path: Vec<f64>,
    /// `Theta_{t_k}`, `k < n`, evaluated along this path.
    pub theta: Vec<f64>,
    /// `phi_k`, `k < n`, flattened with `p` entries per step.
    pub phi: Vec<f64>,
}

impl SimulatedPath {
    /// `||Theta||^2` by a left Riemann sum.
    pub fn theta_sq_norm(&self, dt: f64) -> f64 {
        self.theta.iter().map(|t| t * t).sum::<f64>() * dt
    }

    /// `sum_k Theta_k dW_k`.
    pub fn theta_dw(&self, dw: &[f64]) -> f64 {
        self.theta.iter().zip(dw).map(|(t, w)| t * w).sum()
    }
}

/// Brownian increments for one path.
pub fn draw_increments(model: &PathModel, rng: &mut RngStream) -> Vec<f64> {
    let sd = model.dt().sqrt();
    (0..model.n_steps)
        .map(|_| {
            let z: f64 = StandardNormal.sample(rng);
            sd * z
        })
        .collect()
}

/// `X_{k+1} = X_k + (b + s sigma Theta_k) dt + sigma dW_k`, `s` from `shift`.
pub fn euler_simulate(
    model: &PathModel,
    shift: Shift,
    phi: DriverPhi,
    grid: &BasisGrid,
    coeffs: &[f64],
    dw: &[f64],
) -> Result<SimulatedPath> {
    let n = model.n_steps;
    let p = phi.components();
    if grid.n_steps != n || dw.len() != n {
        return Err(Error::InvalidParameter("grid, increments and model disagree on n_steps".into()));
    }
    if grid.spec.components != p || coeffs.len() != grid.spec.n_coeffs() {
        return Err(Error::InvalidParameter(format!(
            "expected {} coefficients for {} components, got {}",
            grid.spec.n_coeffs(),
            p,
            coeffs.len()
        )));
    }
    let sign = match shift {
        Shift::None => 0.0,
        Shift::Minus => -1.0,
        Shift::Plus => 1.0,
    };
    let dt = model.dt();
    let active = coeffs.iter().any(|c| *c != 0.0);
    let mut path = Vec::with_capacity(n + 1);
    path.push(model.x0);
    let mut theta = Vec::with_capacity(n);
    let mut phis = Vec::with_capacity(n * p);
    let mut p_bar = 1.0;
    for k in 0..n {
        let t = model.time(k);
        let x = path[k];
        let b = model.drift(t, &path);
        let s = model.diffusion(t, &path);
        match phi {
            DriverPhi::Identity => phis.push(1.0),
            DriverPhi::BarrierSurvival { .. } => {
                phis.push(p_bar);
                phis.push(1.0 - p_bar);
            }
        }
        let big_theta = if active {
            (0..p).map(|c| phis[k * p + c] * grid.theta(coeffs, k, c)).sum()
        } else {
            0.0
        };
        theta.push(big_theta);
        let next = x + (b + sign * s * big_theta) * dt + s * dw[k];
        if !next.is_finite() {
            return Err(Error::Simulation { step: k });
        }
        path.push(next);
        if let DriverPhi::BarrierSurvival { barrier } = phi {
            p_bar *= bridge_survival_prob(x, next, barrier, s, dt);
        }
    }
    Ok(SimulatedPath { path, theta, phi: phis })
}

/// `exp(-sum Theta_k dW_k - 1/2 sum Theta_k^2 dt)` along a `Shift::Plus` path.
pub fn girsanov_weight(sim: &SimulatedPath, dw: &[f64], dt: f64) -> f64 {
    (-sim.theta_dw(dw) - 0.5 * sim.theta_sq_norm(dt)).exp()
}

/// `Psi_{lambda,eta}`: `e^{-|phi| |theta|} / (1 + ||phi theta||^{2 lambda + eta})`
/// for bounded diffusions, `e^{-(|phi| + eta) |theta|}` otherwise.
pub fn psi_normalizer(coeffs: &[f64], sim: &SimulatedPath, phi: DriverPhi, lambda: f64, eta: f64, model: &PathModel) -> f64 {
    let theta_norm = norm(coeffs);
    if model.sigma_bounded() {
        let phi_theta = sim.theta_sq_norm(model.dt()).sqrt();
        (-phi.sup_norm() * theta_norm).exp() / (1.0 + phi_theta.powf(2.0 * lambda + eta))
    } else {
        (-(phi.sup_norm() + eta) * theta_norm).exp()
    }
}

/// Everything needed to run the functional procedure on one payoff.
#[derive(Debug, Clone)]
pub struct FunctionalProblem<P> {
    pub model: PathModel,
    pub phi: DriverPhi,
    pub grid: BasisGrid,
    pub payoff: P,
    pub lambda: f64,
    pub eta: f64,
    /// Apply `Psi`; with `false` the raw gradient sample is used as `H`.
    pub normalize: bool,
}

impl<P: PathPayoff> FunctionalProblem<P> {
    pub fn new(model: PathModel, phi: DriverPhi, basis_kind: BasisKind, dim: usize, payoff: P) -> Result<Self> {
        let spec = BasisSpec::new(basis_kind, dim, phi.components())?;
        let grid = BasisGrid::new(spec, model.n_steps, model.horizon);
        Ok(FunctionalProblem { model, phi, grid, payoff, lambda: 1.0, eta: 1.0, normalize: true })
    }

    pub fn basis(&self) -> BasisSpec {
        self.grid.spec
    }

    pub fn simulate(&self, shift: Shift, coeffs: &[f64], dw: &[f64]) -> Result<SimulatedPath> {
        euler_simulate(&self.model, shift, self.phi, &self.grid, coeffs, dw)
    }

    /// Raw gradient sample along a `Shift::Minus` path, and `Psi` there.
    fn gradient_parts(&self, coeffs: &[f64], dw: &[f64], out: &mut [f64]) -> Result<f64> {
        let sim = self.simulate(Shift::Minus, coeffs, dw)?;
        let psi = psi_normalizer(coeffs, &sim, self.phi, self.lambda, self.eta, &self.model);
        let f = self.payoff.eval(&self.model, &sim.path);
        if f == 0.0 {
            out.fill(0.0);
            return Ok(psi);
        }
        functional_h_raw(&sim, dw, &self.grid, self.model.dt(), out);
        let scale = f * f * sim.theta_sq_norm(self.model.dt()).exp();
        out.iter_mut().for_each(|o| *o *= scale);
        Ok(psi)
    }
}

/// `2 <Theta, phi e_i> - int phi e_i dW` for every coefficient `(c, i)`.
fn functional_h_raw(sim: &SimulatedPath, dw: &[f64], grid: &BasisGrid, dt: f64, out: &mut [f64]) {
    let m = grid.spec.dim;
    let p = grid.spec.components;
    out.fill(0.0);
    for k in 0..dw.len() {
        let th = sim.theta[k];
        for c in 0..p {
            let ph = sim.phi[k * p + c];
            if ph == 0.0 {
                continue;
            }
            for i in 0..m {
                let v = ph * grid.e(k, i);
                out[c * m + i] += 2.0 * th * v * dt - v * dw[k];
            }
        }
    }
}

/// `<H_{lambda,eta}(theta, xi, W), e_i>` for a `Shift::Minus` path `sim`.
#[allow(clippy::too_many_arguments)]
pub fn functional_h<P: PathPayoff + ?Sized>(
    coeffs: &[f64],
    sim: &SimulatedPath,
    dw: &[f64],
    model: &PathModel,
    phi: DriverPhi,
    grid: &BasisGrid,
    payoff: &P,
    lambda: f64,
    eta: f64,
    out: &mut [f64],
) {
    let f = payoff.eval(model, &sim.path);
    functional_h_raw(sim, dw, grid, model.dt(), out);
    let scale = psi_normalizer(coeffs, sim, phi, lambda, eta, model) * f * f * sim.theta_sq_norm(model.dt()).exp();
    out.iter_mut().for_each(|o| *o *= scale);
}

impl<P: PathPayoff> Sampler for FunctionalProblem<P> {
    type Innovation = Vec<f64>;
    fn dim(&self) -> usize {
        self.grid.spec.n_coeffs()
    }
    fn innovation(&self, rng: &mut RngStream) -> Vec<f64> {
        draw_increments(&self.model, rng)
    }
}

impl<P: PathPayoff> RmDriver for FunctionalProblem<P> {
    fn h_value(&self, coeffs: &[f64], dw: &Vec<f64>, out: &mut [f64]) -> Result<()> {
        let psi = self.gradient_parts(coeffs, dw, out)?;
        if self.normalize {
            out.iter_mut().for_each(|o| *o *= psi);
        }
        Ok(())
    }
}

impl<P: PathPayoff> GradientSample for FunctionalProblem<P> {
    fn grad_v_sample(&self, coeffs: &[f64], dw: &Vec<f64>, out: &mut [f64]) -> Result<()> {
        self.gradient_parts(coeffs, dw, out).map(|_| ())
    }
}

impl<P: PathPayoff> IsEstimand for FunctionalProblem<P> {
    fn weighted_payoff(&self, coeffs: &[f64], dw: &Vec<f64>) -> Result<f64> {
        let sim = self.simulate(Shift::Plus, coeffs, dw)?;
        let f = self.payoff.eval(&self.model, &sim.path);
        if f == 0.0 {
            return Ok(0.0);
        }
        Ok(f * girsanov_weight(&sim, dw, self.model.dt()))
    }

    fn v_sample(&self, coeffs: &[f64], dw: &Vec<f64>) -> Result<f64> {
        let sim = self.simulate(Shift::None, coeffs, dw)?;
        let f = self.payoff.eval(&self.model, &sim.path);
        if f == 0.0 {
            return Ok(0.0);
        }
        Ok(f * f * (-sim.theta_dw(dw) + 0.5 * sim.theta_sq_norm(self.model.dt())).exp())
    }
}

/// Writes `(t, theta_1(t), ..., theta_p(t))` at `points` equally spaced times.
pub fn dump_theta_process<W: Write>(basis: &BasisSpec, coeffs: &[f64], horizon: f64, points: usize, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["t".to_string()];
    header.extend((1..=basis.components).map(|c| format!("theta_{c}")));
    w.write_record(&header)?;
    let scale = 1.0 / horizon.sqrt();
    for j in 0..points {
        let s = if points > 1 { j as f64 / (points - 1) as f64 } else { 0.0 };
        let mut row = vec![(s * horizon).to_string()];
        row.extend(basis.theta_at(coeffs, s).into_iter().map(|v| (v * scale).to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `(t_k, X_{t_k})`.
pub fn dump_path<W: Write>(model: &PathModel, path: &[f64], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "x"])?;
    for (k, x) in path.iter().enumerate() {
        w.write_record([model.time(k).to_string(), x.to_string()])?;
    }
    w.flush()?;
    Ok(())
}
