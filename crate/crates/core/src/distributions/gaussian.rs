use rand_distr::{Distribution, StandardNormal};

use super::{Density, EsscherFamily, StronglyUnimodal};
use crate::error::Result;
use crate::rng::RngStream;

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// Standard normal law on `R^d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GaussianFamily {
    pub dim: usize,
}

impl GaussianFamily {
    pub fn new(dim: usize) -> Self {
        assert!(dim > 0, "dimension must be positive");
        GaussianFamily { dim }
    }
}

/// `grad p(x) / p(x) = -x` for the standard normal density.
pub fn gaussian_grad_log(x: &[f64]) -> Vec<f64> {
    x.iter().map(|v| -v).collect()
}

impl Density for GaussianFamily {
    fn dim(&self) -> usize {
        self.dim
    }

    fn log_density(&self, x: &[f64]) -> f64 {
        let sq: f64 = x.iter().map(|v| v * v).sum();
        -0.5 * (self.dim as f64 * LN_2PI + sq)
    }

    fn grad_log_density(&self, x: &[f64], out: &mut [f64]) {
        for (o, v) in out.iter_mut().zip(x) {
            *o = -v;
        }
    }

    fn sample(&self, rng: &mut RngStream, out: &mut [f64]) {
        for o in out.iter_mut() {
            *o = StandardNormal.sample(rng);
        }
    }
}

impl StronglyUnimodal for GaussianFamily {
    fn unimodal_constants(&self) -> (f64, f64) {
        (2.0, 0.5)
    }
}

impl EsscherFamily for GaussianFamily {
    type Innovation = Vec<f64>;

    fn dim(&self) -> usize {
        self.dim
    }

    fn cgf(&self, theta: &[f64]) -> Result<f64> {
        Ok(0.5 * theta.iter().map(|t| t * t).sum::<f64>())
    }

    fn cgf_grad(&self, theta: &[f64], out: &mut [f64]) -> Result<()> {
        out.copy_from_slice(theta);
        Ok(())
    }

    fn innovation(&self, rng: &mut RngStream) -> Vec<f64> {
        (0..self.dim).map(|_| StandardNormal.sample(rng)).collect()
    }

    fn tilted(&self, theta: &[f64], xi: &Vec<f64>, out: &mut [f64]) -> Result<()> {
        for ((o, z), t) in out.iter_mut().zip(xi).zip(theta) {
            *o = z + t;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::integrate;

    #[test]
    fn grad_log_closed_form() {
        assert_eq!(gaussian_grad_log(&[0.0]), vec![-0.0]);
        assert_eq!(gaussian_grad_log(&[1.0, 2.0]), vec![-1.0, -2.0]);
    }

    #[test]
    fn grad_log_matches_finite_difference() {
        let g = GaussianFamily::new(2);
        let x = [0.7, -1.3];
        let mut grad = [0.0; 2];
        g.grad_log_density(&x, &mut grad);
        let h = 1e-5;
        for i in 0..2 {
            let mut up = x;
            let mut dn = x;
            up[i] += h;
            dn[i] -= h;
            let fd = (g.log_density(&up) - g.log_density(&dn)) / (2.0 * h);
            assert!((fd - grad[i]).abs() < 1e-6);
        }
    }

    #[test]
    fn density_integrates_to_one() {
        let g = GaussianFamily::new(1);
        let (v, _) = integrate(|x| g.density(&[x]), -40.0, 40.0, 1e-12, 1e-12);
        assert!((v - 1.0).abs() < 1e-10);
    }
}
