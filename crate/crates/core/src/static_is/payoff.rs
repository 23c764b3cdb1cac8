/// A payoff functional on `R^d`.
pub trait Payoff: Send + Sync {
    fn eval(&self, x: &[f64]) -> f64;

    /// `(ln|F(x)|, sign F(x))`. Overridden where `F` itself can overflow.
    fn log_abs(&self, x: &[f64]) -> (f64, f64) {
        let f = self.eval(x);
        (f.abs().ln(), f.signum())
    }
}

impl<F: Fn(&[f64]) -> f64 + Send + Sync> Payoff for F {
    fn eval(&self, x: &[f64]) -> f64 {
        self(x)
    }
}

/// `F(x) = exp(a * sum x_i)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpPayoff {
    pub a: f64,
}

impl Payoff for ExpPayoff {
    fn eval(&self, x: &[f64]) -> f64 {
        (self.a * x.iter().sum::<f64>()).exp()
    }

    fn log_abs(&self, x: &[f64]) -> (f64, f64) {
        (self.a * x.iter().sum::<f64>(), 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantPayoff(pub f64);

impl Payoff for ConstantPayoff {
    fn eval(&self, _: &[f64]) -> f64 {
        self.0
    }
}

/// `notional * (e^x - K)_+` on the first coordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CallPayoff {
    pub notional: f64,
    pub strike: f64,
}

impl Payoff for CallPayoff {
    fn eval(&self, x: &[f64]) -> f64 {
        self.notional * (x[0].exp() - self.strike).max(0.0)
    }

    fn log_abs(&self, x: &[f64]) -> (f64, f64) {
        // e^x - K = e^x (1 - K e^{-x})
        let inner = -self.strike * (-x[0]).exp();
        if inner <= -1.0 {
            return (f64::NEG_INFINITY, 0.0);
        }
        (self.notional.ln() + x[0] + inner.ln_1p(), 1.0)
    }
}

/// `notional * (e^{x_1} - c e^{x_2} - K)_+`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SparkSpread {
    pub notional: f64,
    pub c: f64,
    pub strike: f64,
}

impl Payoff for SparkSpread {
    fn eval(&self, x: &[f64]) -> f64 {
        self.notional * (x[0].exp() - self.c * x[1].exp() - self.strike).max(0.0)
    }

    fn log_abs(&self, x: &[f64]) -> (f64, f64) {
        let inner = -(self.c * (x[1] - x[0]).exp() + self.strike * (-x[0]).exp());
        if inner <= -1.0 {
            return (f64::NEG_INFINITY, 0.0);
        }
        (self.notional.ln() + x[0] + inner.ln_1p(), 1.0)
    }
}

/// Envelope `F~(x) = scale * exp(rate * sum x_i)` dominating `|F|`,
/// together with the growth constants `(lambda, b, c)` of the translation
/// hypothesis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthEnvelope {
    pub lambda: f64,
    pub b: f64,
    pub c: f64,
    pub scale: f64,
    pub rate: f64,
    /// Grow along one coordinate only; `None` uses the coordinate sum.
    pub axis: Option<usize>,
}

impl GrowthEnvelope {
    /// `50 e^x` style envelope for call payoffs, with `c = lambda = b = 1`.
    pub fn exponential(scale: f64) -> Self {
        GrowthEnvelope { lambda: 1.0, b: 1.0, c: 1.0, scale, rate: 1.0, axis: None }
    }

    /// `scale * e^{x_axis}`, e.g. for spreads long one coordinate.
    pub fn exponential_in(scale: f64, axis: usize) -> Self {
        GrowthEnvelope { axis: Some(axis), ..Self::exponential(scale) }
    }

    fn linear(&self, x: &[f64]) -> f64 {
        match self.axis {
            Some(i) => x[i],
            None => x.iter().sum(),
        }
    }

    pub fn constant(bound: f64) -> Self {
        GrowthEnvelope { lambda: 0.0, b: 1.0, c: 1.0, scale: bound, rate: 0.0, axis: None }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        self.scale * (self.rate * self.linear(x)).exp()
    }

    /// `1 / (1 + F~(-theta)^{2c})`, in log form to survive large `theta`.
    pub fn log_normalizer(&self, theta: &[f64]) -> f64 {
        let log_env = self.scale.ln() - self.rate * self.linear(theta);
        let y = 2.0 * self.c * log_env;
        -(y.max(0.0) + (-y.abs()).exp().ln_1p())
    }

    /// Whether the envelope dominates `|F|` at every given point.
    pub fn dominates<P: Payoff + ?Sized>(&self, payoff: &P, points: &[Vec<f64>]) -> bool {
        points.iter().all(|x| payoff.eval(x).abs() <= self.value(x) * (1.0 + 1e-12))
    }

    /// The hypothesis needs `b < a` for the family's constant `a`.
    pub fn compatible_with(&self, a: f64) -> bool {
        self.b < a
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn payoffs() {
        let call = CallPayoff { notional: 50.0, strike: 1.0 };
        assert_eq!(call.eval(&[0.0]), 0.0);
        assert!((call.eval(&[1.0]) - 50.0 * (1f64.exp() - 1.0)).abs() < 1e-12);
        let s = SparkSpread { notional: 50.0, c: 0.2, strike: 0.4 };
        assert!((s.eval(&[0.0, 0.0]) - 50.0 * 0.4).abs() < 1e-12);
        assert_eq!(ExpPayoff { a: 1.0 }.eval(&[0.0]), 1.0);
        for x in [0.5, 1.0, 3.0] {
            let (l, sg) = call.log_abs(&[x]);
            assert!((sg * l.exp() - call.eval(&[x])).abs() < 1e-9 * call.eval(&[x]));
            let (l, _) = s.log_abs(&[x, -x]);
            assert!((l.exp() - s.eval(&[x, -x])).abs() < 1e-9 * s.eval(&[x, -x]));
        }
        assert_eq!(call.log_abs(&[-1.0]).1, 0.0);
        assert!(call.log_abs(&[800.0]).0.is_finite());
    }

    #[test]
    fn envelope_dominates_call_and_normalizer_is_stable() {
        let env = GrowthEnvelope::exponential(50.0);
        let call = CallPayoff { notional: 50.0, strike: 0.6 };
        let pts: Vec<Vec<f64>> = (0..400).map(|i| vec![-20.0 + 0.1 * i as f64]).collect();
        assert!(env.dominates(&call, &pts));
        assert!(env.compatible_with(1.1));
        for &t in &[-800.0, -3.0, 0.0, 2.0, 900.0] {
            let direct = 1.0 / (1.0 + env.value(&[-t]).powi(2));
            let l = env.log_normalizer(&[t]);
            assert!(l.is_finite() && l <= 0.0);
            if direct > 0.0 {
                assert!((l.exp() - direct).abs() <= 1e-12 * direct.max(1e-300));
            }
        }
        let spark = SparkSpread { notional: 50.0, c: 0.2, strike: 0.4 };
        let pts2: Vec<Vec<f64>> = (0..900).map(|i| vec![-6.0 + 0.4 * (i % 30) as f64, -6.0 + 0.4 * (i / 30) as f64]).collect();
        assert!(GrowthEnvelope::exponential_in(50.0, 0).dominates(&spark, &pts2));
        assert!(!GrowthEnvelope::exponential(50.0).dominates(&spark, &pts2));
    }
}
