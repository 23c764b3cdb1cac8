use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::bessel::{bessel_k_scaled, k01_scaled};
use super::{Density, EsscherFamily, StronglyUnimodal};
use crate::error::{Error, Result};
use crate::rng::RngStream;

/// Normal inverse Gaussian law NIG(alpha, beta, delta, mu).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NigParams {
    alpha: f64,
    beta: f64,
    delta: f64,
    mu: f64,
    gamma: f64,
}

/// The uniform/normal tuple behind one NIG draw. Any Esscher tilt of the law
/// is recomputed from the same tuple, so shifted draws cost the same as
/// plain ones.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NigInnovation {
    /// Normal variate feeding the inverse Gaussian root.
    pub nu: f64,
    /// Uniform variate choosing between the two roots.
    pub u: f64,
    /// Normal variate of the variance-mean mixture.
    pub normal: f64,
}

impl NigInnovation {
    pub fn draw(rng: &mut RngStream) -> Self {
        NigInnovation {
            nu: StandardNormal.sample(rng),
            u: rng.random(),
            normal: StandardNormal.sample(rng),
        }
    }
}

/// Michael-Schucany-Haas transform: inverse Gaussian draw with the given
/// mean and shape from a normal `nu` and a uniform `u`.
fn inverse_gaussian(mean: f64, shape: f64, nu: f64, u: f64) -> f64 {
    let y = nu * nu;
    if y == 0.0 {
        return mean;
    }
    let my = mean * y;
    // mean + mean/(2 shape) (my - sqrt(4 mean shape y + my^2)), written
    // without the cancellation for large y.
    let root = (my * my + 4.0 * mean * shape * y).sqrt();
    let x = mean - 2.0 * mean * my / (my + root);
    if x <= 0.0 {
        // y so large that x underflowed; the other root is then chosen with
        // probability one.
        return mean * (my + root) / (2.0 * shape);
    }
    if u <= mean / (mean + x) {
        x
    } else {
        mean * mean / x
    }
}

impl NigParams {
    pub fn new(alpha: f64, beta: f64, delta: f64, mu: f64) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::InvalidParameter(format!("NIG alpha must be positive, got {alpha}")));
        }
        if !(beta.abs() <= alpha) {
            return Err(Error::InvalidParameter(format!("NIG needs |beta| <= alpha, got beta={beta}")));
        }
        if !(delta > 0.0) || !delta.is_finite() {
            return Err(Error::InvalidParameter(format!("NIG delta must be positive, got {delta}")));
        }
        if !mu.is_finite() {
            return Err(Error::InvalidParameter(format!("NIG mu must be finite, got {mu}")));
        }
        let gamma = ((alpha - beta) * (alpha + beta)).sqrt();
        Ok(NigParams { alpha, beta, delta, mu, gamma })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn beta(&self) -> f64 {
        self.beta
    }
    pub fn delta(&self) -> f64 {
        self.delta
    }
    pub fn mu(&self) -> f64 {
        self.mu
    }
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn mean(&self) -> f64 {
        self.mu + self.delta * self.beta / self.gamma
    }

    pub fn variance(&self) -> f64 {
        self.delta * self.alpha * self.alpha / self.gamma.powi(3)
    }

    pub fn log_pdf(&self, x: f64) -> f64 {
        let dx = x - self.mu;
        let q = self.delta.hypot(dx);
        let z = self.alpha * q;
        let k1s = k01_scaled(z).1;
        (self.alpha * self.delta / std::f64::consts::PI).ln() + k1s.ln() - z - q.ln()
            + self.delta * self.gamma
            + self.beta * dx
    }

    pub fn pdf(&self, x: f64) -> f64 {
        self.log_pdf(x).exp()
    }

    /// `p'(x) / p(x)`, from `K_1'(z) = K_1(z)/z - K_2(z)`.
    pub fn grad_log_pdf(&self, x: f64) -> f64 {
        let dx = x - self.mu;
        let q = self.delta.hypot(dx);
        let z = self.alpha * q;
        let k1 = bessel_k_scaled(1, z).expect("z > 0");
        let k2 = bessel_k_scaled(2, z).expect("z > 0");
        let dlog_k1 = 1.0 / z - k2 / k1;
        self.beta + dx / q * (self.alpha * dlog_k1 - 1.0 / q)
    }

    pub fn pdf_derivative(&self, x: f64) -> f64 {
        self.pdf(x) * self.grad_log_pdf(x)
    }

    fn check_cgf_domain(&self, theta: f64) -> Result<()> {
        let lo = -self.alpha - self.beta;
        let hi = self.alpha - self.beta;
        if theta > lo && theta < hi {
            Ok(())
        } else {
            Err(Error::domain(
                "nig_cgf",
                format!("theta={theta} outside the open interval ({lo}, {hi})"),
            ))
        }
    }

    /// `psi(t) = mu t + delta (gamma - sqrt(alpha^2 - (beta + t)^2))`.
    pub fn cgf(&self, theta: f64) -> Result<f64> {
        self.check_cgf_domain(theta)?;
        let b = self.beta + theta;
        Ok(self.mu * theta + self.delta * (self.gamma - ((self.alpha - b) * (self.alpha + b)).sqrt()))
    }

    pub fn cgf_grad(&self, theta: f64) -> Result<f64> {
        self.check_cgf_domain(theta)?;
        let b = self.beta + theta;
        Ok(self.mu + self.delta * b / ((self.alpha - b) * (self.alpha + b)).sqrt())
    }

    /// Law of the Esscher tilt by `theta`: NIG(alpha, beta + theta, delta, mu).
    pub fn tilt(&self, theta: f64) -> Result<NigParams> {
        self.check_cgf_domain(theta)?;
        NigParams::new(self.alpha, self.beta + theta, self.delta, self.mu)
    }

    /// `X = mu + beta Z + sqrt(Z) N` with `Z ~ IG(delta, gamma)` rebuilt from `xi`.
    pub fn from_innovation(&self, xi: &NigInnovation) -> f64 {
        let z = inverse_gaussian(self.delta / self.gamma, self.delta * self.delta, xi.nu, xi.u);
        self.mu + self.beta * z + z.sqrt() * xi.normal
    }

    pub fn sample(&self, rng: &mut RngStream) -> f64 {
        self.from_innovation(&NigInnovation::draw(rng))
    }

    /// Smallest `delta` with `|d/dx (log p(x) - beta x)| <= delta` everywhere.
    /// The second difference of `log p` over a span `2t` is then bounded by
    /// `2 delta |t|`, which is the translation weight control with `a = 1`.
    fn translation_delta(&self) -> f64 {
        // |slope| as a function of q = sqrt(delta^2 + (x-mu)^2) >= delta.
        let slope = |q: f64| {
            let z = self.alpha * q;
            let (k0, k1) = k01_scaled(z);
            let ratio = (1.0 - (self.delta / q).powi(2)).max(0.0).sqrt();
            ratio * (self.alpha * k0 / k1 + 2.0 / q)
        };
        let steps = 4000;
        let mut best: f64 = self.alpha;
        for i in 0..=steps {
            let q = self.delta * (1e6f64).powf(i as f64 / steps as f64);
            best = best.max(slope(q));
        }
        best * (1.0 + 1e-6)
    }
}

/// Independent NIG coordinates; `d = 1` is the plain NIG law.
#[derive(Debug, Clone, PartialEq)]
pub struct NigVector {
    coords: Vec<NigParams>,
    deltas: Vec<f64>,
    translation_delta: f64,
}

impl NigVector {
    pub fn new(coords: Vec<NigParams>) -> Self {
        assert!(!coords.is_empty(), "at least one coordinate");
        let deltas: Vec<f64> = coords.iter().map(|c| c.translation_delta()).collect();
        let translation_delta = deltas.iter().cloned().fold(0.0, f64::max);
        NigVector { coords, deltas, translation_delta }
    }

    pub fn single(params: NigParams) -> Self {
        NigVector::new(vec![params])
    }

    pub fn coords(&self) -> &[NigParams] {
        &self.coords
    }

    pub fn mean(&self) -> Vec<f64> {
        self.coords.iter().map(NigParams::mean).collect()
    }
}

impl Density for NigVector {
    fn dim(&self) -> usize {
        self.coords.len()
    }

    fn log_density(&self, x: &[f64]) -> f64 {
        self.coords.iter().zip(x).map(|(c, &v)| c.log_pdf(v)).sum()
    }

    fn grad_log_density(&self, x: &[f64], out: &mut [f64]) {
        for ((o, c), &v) in out.iter_mut().zip(&self.coords).zip(x) {
            *o = c.grad_log_pdf(v);
        }
    }

    fn sample(&self, rng: &mut RngStream, out: &mut [f64]) {
        for (o, c) in out.iter_mut().zip(&self.coords) {
            *o = c.sample(rng);
        }
    }
}

impl StronglyUnimodal for NigVector {
    fn unimodal_constants(&self) -> (f64, f64) {
        // Per-coordinate bounds add up to at most sqrt(d) * delta * |t|.
        let d = self.coords.len() as f64;
        (1.0, self.translation_delta * d.sqrt())
    }

    // The weight factorizes over independent coordinates.
    fn log_weight_bound(&self, t: &[f64]) -> f64 {
        2.0 * self.deltas.iter().zip(t).map(|(d, v)| d * v.abs()).sum::<f64>()
    }
}

impl EsscherFamily for NigVector {
    type Innovation = Vec<NigInnovation>;

    fn dim(&self) -> usize {
        self.coords.len()
    }

    fn cgf(&self, theta: &[f64]) -> Result<f64> {
        self.coords.iter().zip(theta).map(|(c, &t)| c.cgf(t)).sum()
    }

    fn cgf_grad(&self, theta: &[f64], out: &mut [f64]) -> Result<()> {
        for ((o, c), &t) in out.iter_mut().zip(&self.coords).zip(theta) {
            *o = c.cgf_grad(t)?;
        }
        Ok(())
    }

    fn innovation(&self, rng: &mut RngStream) -> Vec<NigInnovation> {
        self.coords.iter().map(|_| NigInnovation::draw(rng)).collect()
    }

    fn tilted(&self, theta: &[f64], xi: &Vec<NigInnovation>, out: &mut [f64]) -> Result<()> {
        for (((o, c), &t), e) in out.iter_mut().zip(&self.coords).zip(theta).zip(xi) {
            *o = if t == 0.0 {
                c.from_innovation(e)
            } else {
                c.tilt(t)?.from_innovation(e)
            };
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::integrate;
    use crate::rng::stream;

    fn table_params() -> NigParams {
        NigParams::new(2.0, 0.2, 0.8, 0.04).unwrap()
    }

    #[test]
    fn parameter_validation() {
        assert!(NigParams::new(0.0, 0.0, 1.0, 0.0).is_err());
        assert!(NigParams::new(1.0, 1.5, 1.0, 0.0).is_err());
        assert!(NigParams::new(1.0, 0.5, 0.0, 0.0).is_err());
        assert!(NigParams::new(1.0, 0.5, 1.0, f64::NAN).is_err());
        let p = table_params();
        let rel = (p.gamma() * p.gamma() + p.beta() * p.beta() - p.alpha() * p.alpha()).abs() / 4.0;
        assert!(rel < 1e-12);
    }

    #[test]
    fn symmetric_case() {
        let p = NigParams::new(1.5, 0.0, 0.6, 0.3).unwrap();
        for &u in &[0.3, 1.7] {
            let (l, r) = (p.pdf(0.3 + u), p.pdf(0.3 - u));
            assert!((l - r).abs() <= 1e-15 * l);
        }
        assert_eq!(p.pdf_derivative(0.3), 0.0);
    }

    #[test]
    fn density_integrates_to_one() {
        let p = table_params();
        let (v, _) = integrate(|x| p.pdf(x), 0.04 - 32.0, 0.04 + 32.0, 1e-12, 1e-12);
        assert!((v - 1.0).abs() < 1e-6, "{v}");
    }

    #[test]
    fn density_matches_fourier_inversion() {
        // p(x) = 1/pi int_0^inf Re[exp(-iux) phi(u)] du with
        // phi(u) = exp(i mu u + delta (gamma - sqrt(alpha^2 - (beta + iu)^2))).
        let p = table_params();
        let (a, b, d, m, g) = (2.0f64, 0.2f64, 0.8f64, 0.04f64, p.gamma());
        let integrand = |u: f64| {
            // sqrt of the complex number w = alpha^2 - beta^2 + u^2 - 2 i beta u.
            let (re, im) = (a * a - b * b + u * u, -2.0 * b * u);
            let r = re.hypot(im);
            let (sr, si) = (((r + re) / 2.0).sqrt(), im.signum() * ((r - re) / 2.0).sqrt());
            let log_mod = d * (g - sr);
            let phase = m * u - d * si;
            log_mod.exp() * phase.cos()
        };
        let (v, _) = integrate(integrand, 0.0, 80.0, 1e-14, 1e-14);
        let oracle = v / std::f64::consts::PI;
        assert!((p.pdf(0.0) - oracle).abs() < 1e-8, "{} vs {}", p.pdf(0.0), oracle);
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let p = table_params();
        for &x in &[-1.0, 0.5, 2.0] {
            let h = 1e-6;
            let fd = (p.pdf(x + h) - p.pdf(x - h)) / (2.0 * h);
            let d = p.pdf_derivative(x);
            assert!((fd - d).abs() / d.abs() < 1e-5, "x={x}: {fd} vs {d}");
        }
        assert!(p.pdf_derivative(-6.0) > 0.0);
        assert!(p.pdf_derivative(6.0) < 0.0);
    }

    #[test]
    fn cgf_values_and_domain() {
        let p = table_params();
        assert_eq!(p.cgf(0.0).unwrap(), 0.0);
        assert!((p.cgf_grad(0.0).unwrap() - p.mean()).abs() < 1e-15);
        assert!(p.cgf(1.8).is_err());
        assert!(p.cgf(-2.2).is_err());
        assert!(p.cgf(1.79).is_ok());
        for &t in &[-1.5, 0.0, 0.9, 1.6] {
            let h = 1e-6;
            let fd = (p.cgf(t + h).unwrap() - p.cgf(t - h).unwrap()) / (2.0 * h);
            let g = p.cgf_grad(t).unwrap();
            assert!((fd - g).abs() / g.abs().max(1e-3) < 1e-5);
        }
    }

    #[test]
    fn cgf_is_convex() {
        let p = table_params();
        let (lo, hi) = (-2.2, 1.8);
        let h = (hi - lo) / 102.0;
        for i in 1..=100 {
            let t = lo + h * (i as f64 + 0.5);
            let c = p.cgf(t - h).unwrap() - 2.0 * p.cgf(t).unwrap() + p.cgf(t + h).unwrap();
            assert!(c >= -1e-10);
        }
    }

    #[test]
    fn esscher_density_is_normalised() {
        let p = table_params();
        for &t in &[-1.2, 0.7, 1.5] {
            let psi = p.cgf(t).unwrap();
            let (v, _) = integrate(|x| (t * x - psi).exp() * p.pdf(x), -60.0, 120.0, 1e-12, 1e-12);
            assert!((v - 1.0).abs() < 1e-6, "t={t}: {v}");
        }
    }

    #[test]
    fn tilted_innovation_matches_tilted_law() {
        let p = table_params();
        let v = NigVector::single(p);
        let mut rng = stream(3, 0);
        let xi = v.innovation(&mut rng);
        let mut a = [0.0];
        v.tilted(&[0.7], &xi, &mut a).unwrap();
        assert_eq!(a[0], p.tilt(0.7).unwrap().from_innovation(&xi[0]));
        let mut z = [0.0];
        v.tilted(&[0.0], &xi, &mut z).unwrap();
        assert_eq!(z[0], p.from_innovation(&xi[0]));
    }

    #[test]
    fn inverse_gaussian_handles_extreme_normals() {
        for &nu in &[0.0, 1e-8, 3.0, 40.0, 1e8] {
            for &u in &[0.0, 0.5, 1.0 - 1e-16] {
                let z = inverse_gaussian(0.4, 0.64, nu, u);
                assert!(z.is_finite() && z > 0.0, "nu={nu} u={u}: {z}");
            }
        }
    }

    #[test]
    fn translation_delta_bounds_second_difference() {
        let v = NigVector::single(table_params());
        let (a, delta) = v.unimodal_constants();
        assert_eq!(a, 1.0);
        assert!(delta >= 2.0);
        for i in 0..200 {
            let t = -10.0 + 0.1 * i as f64 + 0.05;
            for j in 0..200 {
                let x = -30.0 + 0.3 * j as f64;
                let w = 2.0 * v.log_density(&[x - t]) - v.log_density(&[x]) - v.log_density(&[x - 2.0 * t]);
                assert!(w <= 2.0 * delta * t.abs() + 1e-9);
            }
        }
    }

    #[test]
    fn product_weight_bound_holds_per_coordinate() {
        let gas = NigParams::new(1.4, 0.2, 0.2, 0.04).unwrap();
        let v = NigVector::new(vec![table_params(), gas]);
        let mut rng = crate::rng::stream(5, 0);
        for _ in 0..5000 {
            let t = [rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)];
            let x = [rng.random_range(-20.0..20.0), rng.random_range(-20.0..20.0)];
            let w = 2.0 * v.log_density(&[x[0] - t[0], x[1] - t[1]]) - v.log_density(&x) - v.log_density(&[x[0] - 2.0 * t[0], x[1] - 2.0 * t[1]]);
            let bound = v.log_weight_bound(&t);
            assert!(w <= bound + 1e-9);
            assert!(bound <= 2.0 * v.unimodal_constants().1 * (t[0] * t[0] + t[1] * t[1]).sqrt() + 1e-12);
        }
    }
}
