//! Robbins-Monro engine: step schedules, the raw update, full runs with
//! Ruppert-Polyak averaging, reparametrised runs and CLT diagnostics.

mod clt;
mod reparam;

pub use clt::{asymptotic_variance, clt_diagnostics, CltDiagnostics};
pub use reparam::{run_rm_reparam, Reparam, ReparamRun, Reparametrized};

use std::io::Write;

use crate::error::{Error, Result};
use crate::rng::RngStream;

/// Something that draws i.i.d. innovations for a parametric problem.
///
/// The innovation is whatever raw randomness must be shared between the
/// Robbins-Monro update and the Monte Carlo weight (a draw of `X`, the
/// uniform/normal tuple behind an NIG variate, a block of Brownian
/// increments).
pub trait Sampler: Sync {
    type Innovation: Send;

    /// Dimension of the parameter `theta`.
    fn dim(&self) -> usize;

    fn innovation(&self, rng: &mut RngStream) -> Self::Innovation;
}

/// State function `H(theta, xi)` of a Robbins-Monro procedure.
pub trait RmDriver: Sampler {
    fn h_value(&self, theta: &[f64], xi: &Self::Innovation, out: &mut [f64]) -> Result<()>;
}

impl<T: Sampler + ?Sized> Sampler for &T {
    type Innovation = T::Innovation;
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn innovation(&self, rng: &mut RngStream) -> Self::Innovation {
        (**self).innovation(rng)
    }
}

impl<T: RmDriver + ?Sized> RmDriver for &T {
    fn h_value(&self, theta: &[f64], xi: &Self::Innovation, out: &mut [f64]) -> Result<()> {
        (**self).h_value(theta, xi, out)
    }
}

/// Gain sequence `gamma_n`, `n >= 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepSchedule {
    /// `a / (b + n)`
    Harmonic { a: f64, b: f64 },
    /// `c / n^r` with `r` in `(1/2, 1]`
    Power { c: f64, r: f64 },
}

impl StepSchedule {
    pub fn harmonic(a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) || !(b >= 0.0 && b.is_finite()) {
            return Err(Error::InvalidParameter(format!("harmonic schedule needs a > 0, b >= 0 (a={a}, b={b})")));
        }
        Ok(StepSchedule::Harmonic { a, b })
    }

    pub fn power(c: f64, r: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) || !(r > 0.5 && r <= 1.0) {
            return Err(Error::InvalidParameter(format!("power schedule needs c > 0, r in (1/2, 1] (c={c}, r={r})")));
        }
        Ok(StepSchedule::Power { c, r })
    }

    pub fn gamma(&self, n: usize) -> f64 {
        let n = n as f64;
        match *self {
            StepSchedule::Harmonic { a, b } => a / (b + n),
            StepSchedule::Power { c, r } => c / n.powf(r),
        }
    }
}

impl Default for StepSchedule {
    fn default() -> Self {
        StepSchedule::Harmonic { a: 1.0, b: 1000.0 }
    }
}

/// `theta - gamma * h`, failing when the result is not finite.
pub fn rm_step(theta: &[f64], gamma: f64, h_value: &[f64]) -> Result<Vec<f64>> {
    let mut next = theta.to_vec();
    rm_step_in_place(&mut next, gamma, h_value, 0)?;
    Ok(next)
}

fn rm_step_in_place(theta: &mut [f64], gamma: f64, h: &[f64], iteration: usize) -> Result<()> {
    for (t, &v) in theta.iter_mut().zip(h) {
        *t -= gamma * v;
    }
    if theta.iter().all(|t| t.is_finite()) {
        Ok(())
    } else {
        Err(Error::Diverged { iteration })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RmOptions {
    /// Record every `stride`-th iterate (plus the first and last).
    pub stride: usize,
    /// Maintain the Ruppert-Polyak average.
    pub average: bool,
    /// Stop as diverged once `|theta|` exceeds this. Only for baselines.
    pub guard: Option<f64>,
}

impl Default for RmOptions {
    fn default() -> Self {
        RmOptions { stride: 100, average: true, guard: None }
    }
}

impl RmOptions {
    pub fn with_guard(guard: f64) -> Self {
        RmOptions { guard: Some(guard), ..Self::default() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryPoint {
    pub iter: usize,
    pub theta: Vec<f64>,
    /// Gain used to produce this iterate; zero for the starting point.
    pub gamma: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RmRun {
    pub trajectory: Vec<TrajectoryPoint>,
    pub theta_final: Vec<f64>,
    /// Mean of `theta_0, ..., theta_n`; equals `theta_final` when averaging is off.
    pub theta_averaged: Vec<f64>,
    pub n_iters: usize,
    /// Iteration at which the run was stopped, if it diverged.
    pub diverged: Option<usize>,
}

impl RmRun {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        write_trajectory(out, self.trajectory.iter().map(|p| (p.iter, p.theta.as_slice(), p.gamma)))
    }
}

pub(crate) fn write_trajectory<'a, W: Write>(
    out: W,
    rows: impl Iterator<Item = (usize, &'a [f64], f64)>,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header_done = false;
    for (iter, theta, gamma) in rows {
        if !header_done {
            let mut h = vec!["iter".to_string()];
            h.extend((1..=theta.len()).map(|i| format!("theta_{i}")));
            h.push("gamma".into());
            w.write_record(&h)?;
            header_done = true;
        }
        let mut r = vec![iter.to_string()];
        r.extend(theta.iter().map(|t| t.to_string()));
        r.push(gamma.to_string());
        w.write_record(&r)?;
    }
    w.flush()?;
    Ok(())
}

/// Runs `n` iterations of `theta <- theta - gamma_{k} H(theta, xi_k)`.
///
/// Driver errors (CGF domain, density underflow) are returned as `Err`.
/// A non-finite iterate or a guard trip stops the run and is reported in
/// [`RmRun::diverged`] instead, since baselines are expected to do that.
pub fn run_rm<D: RmDriver + ?Sized>(
    driver: &D,
    schedule: StepSchedule,
    theta0: &[f64],
    n: usize,
    rng: &mut RngStream,
    options: RmOptions,
) -> Result<RmRun> {
    let q = driver.dim();
    if theta0.len() != q {
        return Err(Error::InvalidParameter(format!("theta0 has length {}, driver expects {q}", theta0.len())));
    }
    if !theta0.iter().all(|t| t.is_finite()) {
        return Err(Error::InvalidParameter("theta0 must be finite".into()));
    }
    let stride = options.stride.max(1);
    let mut theta = theta0.to_vec();
    let mut avg = theta0.to_vec();
    let mut h = vec![0.0; q];
    let mut trajectory = vec![TrajectoryPoint { iter: 0, theta: theta.clone(), gamma: 0.0 }];
    let mut diverged = None;
    let mut done = 0;

    for k in 1..=n {
        let xi = driver.innovation(rng);
        driver.h_value(&theta, &xi, &mut h)?;
        let gamma = schedule.gamma(k);
        let tripped = rm_step_in_place(&mut theta, gamma, &h, k).is_err()
            || options.guard.is_some_and(|g| norm(&theta) > g);
        done = k;
        if options.average {
            // Running mean over k + 1 iterates.
            for (a, &t) in avg.iter_mut().zip(&theta) {
                *a -= (*a - t) / (k as f64 + 1.0);
            }
        }
        if tripped || k % stride == 0 || k == n {
            trajectory.push(TrajectoryPoint { iter: k, theta: theta.clone(), gamma });
        }
        if tripped {
            diverged = Some(k);
            break;
        }
    }

    Ok(RmRun {
        trajectory,
        theta_averaged: if options.average { avg } else { theta.clone() },
        theta_final: theta,
        n_iters: done,
        diverged,
    })
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    /// `H(theta, x) = theta`, no randomness.
    struct Identity;

    impl Sampler for Identity {
        type Innovation = ();
        fn dim(&self) -> usize {
            1
        }
        fn innovation(&self, _: &mut RngStream) {}
    }

    impl RmDriver for Identity {
        fn h_value(&self, theta: &[f64], _: &(), out: &mut [f64]) -> Result<()> {
            out[0] = theta[0];
            Ok(())
        }
    }

    #[test]
    fn single_steps() {
        assert_eq!(rm_step(&[1.0], 0.5, &[2.0]).unwrap(), vec![0.0]);
        assert_eq!(rm_step(&[0.0], 0.3, &[0.0]).unwrap(), vec![0.0]);
        assert!(rm_step(&[1.0], 1.0, &[f64::INFINITY]).is_err());
        assert!(rm_step(&[1.0], 1.0, &[f64::NAN]).is_err());
    }

    #[test]
    fn deterministic_product() {
        // gamma_n = 1/(n+1) so the product (1 - gamma_k) telescopes to 1/(n+1).
        let sched = StepSchedule::harmonic(1.0, 1.0).unwrap();
        let run = run_rm(&Identity, sched, &[3.0], 99, &mut stream(0, 0), RmOptions::default()).unwrap();
        let expected: f64 = (1..=99).map(|k| 1.0 - 1.0 / (k as f64 + 1.0)).product::<f64>() * 3.0;
        assert!((run.theta_final[0] - expected).abs() < 1e-14);
        assert!((run.theta_final[0] - 0.03).abs() < 1e-12);
    }

    #[test]
    fn schedule_validation() {
        assert!(StepSchedule::harmonic(0.0, 1.0).is_err());
        assert!(StepSchedule::power(1.0, 0.5).is_err());
        assert!(StepSchedule::power(1.0, 1.2).is_err());
        let p = StepSchedule::power(2.0, 0.75).unwrap();
        assert!((p.gamma(16) - 0.25).abs() < 1e-15);
        assert_eq!(StepSchedule::default().gamma(1), 1.0 / 1001.0);
    }

    #[test]
    fn averaging_matches_arithmetic_mean() {
        let sched = StepSchedule::power(0.5, 0.7).unwrap();
        let opts = RmOptions { stride: 1, ..RmOptions::default() };
        let run = run_rm(&Identity, sched, &[2.0], 500, &mut stream(0, 0), opts).unwrap();
        let mean = run.trajectory.iter().map(|p| p.theta[0]).sum::<f64>() / run.trajectory.len() as f64;
        assert_eq!(run.trajectory.len(), 501);
        assert!((mean - run.theta_averaged[0]).abs() < 1e-12);
    }

    #[test]
    fn guard_and_stride() {
        // gain > 2 makes |1 - gamma| > 1, so the iterate oscillates and grows.
        let sched = StepSchedule::harmonic(1e4, 0.0).unwrap();
        let run = run_rm(&Identity, sched, &[1.0], 1000, &mut stream(0, 0), RmOptions::with_guard(1e6)).unwrap();
        assert!(run.diverged.is_some());
        assert!(run.n_iters < 1000);

        let run = run_rm(&Identity, StepSchedule::default(), &[1.0], 1050, &mut stream(0, 0), RmOptions::default()).unwrap();
        let iters: Vec<usize> = run.trajectory.iter().map(|p| p.iter).collect();
        assert_eq!(iters.len(), 12);
        assert_eq!(iters[1], 100);
        assert_eq!(*iters.last().unwrap(), 1050);
    }

    #[test]
    fn csv_export_has_header_and_rows() {
        let run = run_rm(&Identity, StepSchedule::default(), &[1.0], 200, &mut stream(0, 0), RmOptions::default()).unwrap();
        let mut buf = Vec::new();
        run.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "iter,theta_1,gamma");
        assert_eq!(lines.len(), 4);
        assert!(lines[1].starts_with("0,1,0"));
    }
}
