use super::{norm, run_rm, RmDriver, RmOptions, RmRun, Sampler, StepSchedule};
use crate::error::{Error, Result};
use crate::rng::RngStream;

/// Diffeomorphic change of parameter `theta = T(theta_tilde)`.
#[derive(Debug, Clone, PartialEq)]
pub enum Reparam {
    Identity,
    /// Coordinatewise `s_i * u / sqrt(1 + u^2)`, mapping onto `(-|s_i|, |s_i|)`.
    Squash { scales: Vec<f64> },
}

impl Reparam {
    pub fn squash(scales: Vec<f64>) -> Result<Self> {
        if scales.iter().any(|s| *s == 0.0 || !s.is_finite()) {
            return Err(Error::InvalidParameter("squash scales must be finite and non-zero".into()));
        }
        Ok(Reparam::Squash { scales })
    }

    pub fn forward(&self, tilde: &[f64]) -> Vec<f64> {
        match self {
            Reparam::Identity => tilde.to_vec(),
            Reparam::Squash { scales } => {
                tilde.iter().zip(scales).map(|(&u, &s)| s * u / (1.0 + u * u).sqrt()).collect()
            }
        }
    }

    /// Diagonal of `DT(theta_tilde)`; both maps act coordinatewise.
    pub fn jacobian_diag(&self, tilde: &[f64]) -> Vec<f64> {
        match self {
            Reparam::Identity => vec![1.0; tilde.len()],
            Reparam::Squash { scales } => {
                tilde.iter().zip(scales).map(|(&u, &s)| s / (1.0 + u * u).powf(1.5)).collect()
            }
        }
    }

    /// Bound on the operator norm of the Jacobian.
    pub fn jacobian_bound(&self) -> f64 {
        match self {
            Reparam::Identity => 1.0,
            Reparam::Squash { scales } => scales.iter().fold(0.0, |m, s| m.max(s.abs())),
        }
    }

    /// Inverse map, for starting a run at a given `theta`.
    pub fn inverse(&self, theta: &[f64]) -> Result<Vec<f64>> {
        match self {
            Reparam::Identity => Ok(theta.to_vec()),
            Reparam::Squash { scales } => theta
                .iter()
                .zip(scales)
                .map(|(&t, &s)| {
                    let v = t / s;
                    if v.abs() < 1.0 {
                        Ok(v / (1.0 - v * v).sqrt())
                    } else {
                        Err(Error::domain("reparam_inverse", format!("theta={t} outside (-{0}, {0})", s.abs())))
                    }
                })
                .collect(),
        }
    }
}

/// `H~(u, x) = DT(u) H(T(u), x)` as a driver in the free coordinates.
pub struct Reparametrized<'a, D: ?Sized> {
    pub inner: &'a D,
    pub reparam: &'a Reparam,
}

impl<D: RmDriver + ?Sized> Sampler for Reparametrized<'_, D> {
    type Innovation = D::Innovation;
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn innovation(&self, rng: &mut RngStream) -> Self::Innovation {
        self.inner.innovation(rng)
    }
}

impl<D: RmDriver + ?Sized> RmDriver for Reparametrized<'_, D> {
    fn h_value(&self, tilde: &[f64], xi: &Self::Innovation, out: &mut [f64]) -> Result<()> {
        let theta = self.reparam.forward(tilde);
        self.inner.h_value(&theta, xi, out)?;
        for (o, j) in out.iter_mut().zip(self.reparam.jacobian_diag(tilde)) {
            *o *= j;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReparamRun {
    /// The run in the free coordinates `theta_tilde`.
    pub tilde: RmRun,
    /// `T` applied to every recorded free iterate.
    pub theta_trajectory: Vec<Vec<f64>>,
    pub theta_final: Vec<f64>,
    /// `T` of the averaged free iterate.
    pub theta_averaged: Vec<f64>,
}

impl ReparamRun {
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let rows = self
            .tilde
            .trajectory
            .iter()
            .zip(&self.theta_trajectory)
            .map(|(p, th)| (p.iter, th.as_slice(), p.gamma));
        super::write_trajectory(out, rows)
    }
}

pub fn run_rm_reparam<D: RmDriver + ?Sized>(
    driver: &D,
    reparam: &Reparam,
    schedule: StepSchedule,
    theta_tilde0: &[f64],
    n: usize,
    rng: &mut RngStream,
    options: RmOptions,
) -> Result<ReparamRun> {
    let wrapped = Reparametrized { inner: driver, reparam };
    let tilde = run_rm(&wrapped, schedule, theta_tilde0, n, rng, options)?;
    let theta_trajectory = tilde.trajectory.iter().map(|p| reparam.forward(&p.theta)).collect();
    debug_assert!(norm(&reparam.jacobian_diag(&tilde.theta_final)) <= reparam.jacobian_bound() * (driver.dim() as f64).sqrt() + 1e-12);
    Ok(ReparamRun {
        theta_final: reparam.forward(&tilde.theta_final),
        theta_averaged: reparam.forward(&tilde.theta_averaged),
        theta_trajectory,
        tilde,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn squash_derivative_matches_finite_difference() {
        let r = Reparam::squash(vec![0.2 - 2.0]).unwrap();
        for &u in &[-5.0, -0.3, 0.0, 0.8, 12.0] {
            let h = 1e-6;
            let fd = (r.forward(&[u + h])[0] - r.forward(&[u - h])[0]) / (2.0 * h);
            assert!((fd - r.jacobian_diag(&[u])[0]).abs() < 1e-8);
        }
    }

    #[test]
    fn squash_is_injective_and_bounded() {
        let r = Reparam::squash(vec![-1.8]).unwrap();
        let mut prev = f64::INFINITY;
        for i in 0..2001 {
            let u = -50.0 + 0.05 * i as f64;
            let t = r.forward(&[u])[0];
            assert!(t < prev && t.abs() < 1.8);
            prev = t;
            assert!(r.jacobian_diag(&[u])[0].abs() <= r.jacobian_bound());
        }
        let back = r.inverse(&r.forward(&[0.37])).unwrap();
        assert!((back[0] - 0.37).abs() < 1e-12);
        assert!(r.inverse(&[1.8]).is_err());
    }
}
