//! Crude, two-stage and purely adaptive Monte Carlo estimators.
//!
//! Monte Carlo loops are split into fixed-size chunks, each with its own
//! random stream; chunk statistics are merged in chunk order, so results
//! do not depend on the number of worker threads.

mod moments;

pub use moments::Moments;

use std::time::Instant;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rng::{stream, RngStream, ADAPTIVE_STREAM, MC_STREAM_BASE, RM_STREAM};
use crate::stochastic_approx::{
    norm, rm_step, run_rm_reparam, Reparam, ReparamRun, RmDriver, RmOptions, Sampler, StepSchedule,
};

/// Samples per Monte Carlo chunk.
pub const CHUNK: usize = 4096;

/// An expectation `E F(X)` that admits unbiased importance-sampling
/// estimators indexed by `theta`.
pub trait IsEstimand: Sampler {
    /// `F(X^(theta))` times the likelihood ratio, so its mean is `E F(X)`
    /// for every `theta`. At `theta = 0` it must be exactly `F(X)`.
    fn weighted_payoff(&self, theta: &[f64], xi: &Self::Innovation) -> Result<f64>;

    /// Unbiased sample of the second moment `V(theta)` of the weighted
    /// payoff, computed from an unshifted draw.
    fn v_sample(&self, theta: &[f64], xi: &Self::Innovation) -> Result<f64>;
}

impl<T: IsEstimand + ?Sized> IsEstimand for &T {
    fn weighted_payoff(&self, theta: &[f64], xi: &Self::Innovation) -> Result<f64> {
        (**self).weighted_payoff(theta, xi)
    }
    fn v_sample(&self, theta: &[f64], xi: &Self::Innovation) -> Result<f64> {
        (**self).v_sample(theta, xi)
    }
}

/// Moments of `f` over `n` samples drawn from deterministic chunk streams.
pub fn chunked_moments<F>(n: usize, seed: u64, f: F) -> Result<Moments>
where
    F: Fn(&mut RngStream) -> Result<f64> + Sync,
{
    let chunks = n.div_ceil(CHUNK);
    let parts: Vec<Result<Moments>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = stream(seed, MC_STREAM_BASE + c as u64);
            let len = CHUNK.min(n - c * CHUNK);
            let mut m = Moments::default();
            for _ in 0..len {
                m.push(f(&mut rng)?);
            }
            Ok(m)
        })
        .collect();
    let mut total = Moments::default();
    for p in parts {
        total.merge(&p?);
    }
    Ok(total)
}

/// Plain IS estimate of `E F(X)` at a fixed `theta`.
pub fn estimate_at<E: IsEstimand + ?Sized>(estimand: &E, theta: &[f64], n: usize, seed: u64) -> Result<Moments> {
    if n < 2 {
        return Err(Error::InvalidParameter("need at least two Monte Carlo samples".into()));
    }
    chunked_moments(n, seed, |rng| {
        let xi = estimand.innovation(rng);
        estimand.weighted_payoff(theta, &xi)
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorReport {
    pub mean: f64,
    /// Per-sample variance of the estimator.
    pub variance: f64,
    pub ci95_halfwidth: f64,
    pub crude_mean: f64,
    pub crude_variance: f64,
    pub variance_ratio: f64,
    pub theta_star: Vec<f64>,
    pub n_rm: usize,
    pub n_mc: usize,
    pub seed: u64,
    /// Seconds; not part of the CSV row so reruns stay byte-identical.
    pub wall_time: f64,
}

impl EstimatorReport {
    fn new(is: Moments, crude: Moments, theta_star: Vec<f64>, n_rm: usize, seed: u64, start: Instant) -> Self {
        let variance = is.variance();
        EstimatorReport {
            mean: is.mean(),
            variance,
            ci95_halfwidth: 1.96 * (variance / is.count() as f64).sqrt(),
            crude_mean: crude.mean(),
            crude_variance: crude.variance(),
            variance_ratio: crude.variance() / variance,
            theta_star,
            n_rm,
            n_mc: is.count(),
            seed,
            wall_time: start.elapsed().as_secs_f64(),
        }
    }

    pub fn csv_header(theta_dim: usize) -> Vec<String> {
        let mut h: Vec<String> = ["mean", "ci95", "variance", "crude_mean", "crude_var", "variance_ratio", "n_rm", "n_mc", "seed"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        h.extend((1..=theta_dim).map(|i| format!("theta_{i}")));
        h
    }

    pub fn csv_fields(&self) -> Vec<String> {
        let mut r = vec![
            self.mean.to_string(),
            self.ci95_halfwidth.to_string(),
            self.variance.to_string(),
            self.crude_mean.to_string(),
            self.crude_variance.to_string(),
            self.variance_ratio.to_string(),
            self.n_rm.to_string(),
            self.n_mc.to_string(),
            self.seed.to_string(),
        ];
        r.extend(self.theta_star.iter().map(|t| t.to_string()));
        r
    }
}

/// Plain Monte Carlo (`theta = 0`); the ratio fields compare it with itself.
pub fn crude<E: IsEstimand + ?Sized>(estimand: &E, n: usize, seed: u64) -> Result<EstimatorReport> {
    let start = Instant::now();
    let zero = vec![0.0; estimand.dim()];
    let m = estimate_at(estimand, &zero, n, seed)?;
    Ok(EstimatorReport::new(m, m, zero, 0, seed, start))
}

/// How the first stage of [`two_stage`] is run.
#[derive(Debug, Clone, PartialEq)]
pub struct RmPlan {
    pub schedule: StepSchedule,
    /// Starting point in `theta` coordinates.
    pub theta0: Vec<f64>,
    pub n_rm: usize,
    pub reparam: Reparam,
    /// Freeze the Ruppert-Polyak average instead of the last iterate.
    pub use_averaged: bool,
}

impl RmPlan {
    pub fn new(schedule: StepSchedule, theta0: Vec<f64>, n_rm: usize) -> Self {
        RmPlan { schedule, theta0, n_rm, reparam: Reparam::Identity, use_averaged: false }
    }

    pub fn with_reparam(mut self, reparam: Reparam) -> Self {
        self.reparam = reparam;
        self
    }

    /// Runs the procedure on the `RM_STREAM` of `seed`.
    pub fn run<D: RmDriver + ?Sized>(&self, driver: &D, seed: u64) -> Result<ReparamRun> {
        let tilde0 = self.reparam.inverse(&self.theta0)?;
        let mut rng = stream(seed, RM_STREAM);
        let run = run_rm_reparam(driver, &self.reparam, self.schedule, &tilde0, self.n_rm, &mut rng, RmOptions::default())?;
        if let Some(iteration) = run.tilde.diverged {
            return Err(Error::Diverged { iteration });
        }
        Ok(run)
    }
}

/// Robbins-Monro for `M` steps, then `N` IS samples at the frozen `theta*`.
/// The crude variance comes from a `theta = 0` run on the same streams.
pub fn two_stage<D, E>(driver: &D, estimand: &E, plan: &RmPlan, n_mc: usize, seed: u64) -> Result<(EstimatorReport, ReparamRun)>
where
    D: RmDriver + ?Sized,
    E: IsEstimand + ?Sized,
{
    let start = Instant::now();
    let run = plan.run(driver, seed)?;
    let theta = if plan.use_averaged { run.theta_averaged.clone() } else { run.theta_final.clone() };
    let report = two_stage_at(estimand, theta, plan.n_rm, n_mc, seed, start)?;
    Ok((report, run))
}

/// Second stage only, for a `theta*` obtained elsewhere.
pub fn frozen<E: IsEstimand + ?Sized>(estimand: &E, theta: Vec<f64>, n_mc: usize, seed: u64) -> Result<EstimatorReport> {
    two_stage_at(estimand, theta, 0, n_mc, seed, Instant::now())
}

fn two_stage_at<E: IsEstimand + ?Sized>(
    estimand: &E,
    theta: Vec<f64>,
    n_rm: usize,
    n_mc: usize,
    seed: u64,
    start: Instant,
) -> Result<EstimatorReport> {
    let is = estimate_at(estimand, &theta, n_mc, seed)?;
    let crude = estimate_at(estimand, &vec![0.0; estimand.dim()], n_mc, seed)?;
    Ok(EstimatorReport::new(is, crude, theta, n_rm, seed, start))
}

/// Purely adaptive estimator: sample `k` is weighted with `theta_{k-1}`,
/// then the same innovation drives the Robbins-Monro update to `theta_k`.
pub fn adaptive<D, E>(
    driver: &D,
    estimand: &E,
    schedule: StepSchedule,
    reparam: &Reparam,
    theta0: &[f64],
    n: usize,
    seed: u64,
) -> Result<EstimatorReport>
where
    D: RmDriver<Innovation = E::Innovation> + ?Sized,
    E: IsEstimand + ?Sized,
{
    if n < 1 {
        return Err(Error::InvalidParameter("need at least one sample".into()));
    }
    let start = Instant::now();
    let mut tilde = reparam.inverse(theta0)?;
    let mut theta = reparam.forward(&tilde);
    let mut h = vec![0.0; driver.dim()];
    let mut rng = stream(seed, ADAPTIVE_STREAM);
    let mut is = Moments::default();
    for k in 1..=n {
        let xi = driver.innovation(&mut rng);
        is.push(estimand.weighted_payoff(&theta, &xi)?);
        driver.h_value(&theta, &xi, &mut h)?;
        for (v, j) in h.iter_mut().zip(reparam.jacobian_diag(&tilde)) {
            *v *= j;
        }
        tilde = rm_step(&tilde, schedule.gamma(k), &h).map_err(|_| Error::Diverged { iteration: k })?;
        theta = reparam.forward(&tilde);
        debug_assert!(norm(&theta).is_finite());
    }
    let crude = if n >= 2 {
        estimate_at(estimand, &vec![0.0; estimand.dim()], n, seed)?
    } else {
        is
    };
    Ok(EstimatorReport::new(is, crude, theta, n, seed, start))
}
