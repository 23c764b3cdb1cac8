use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisKind {
    /// `sqrt(2n+1) P_n(2t - 1)`.
    ShiftedLegendre,
    /// `sqrt(2) sin((n + 1/2) pi t)`.
    KarhunenLoeve,
    /// The constant 1, then `psi_{0,0}, psi_{1,0}, psi_{1,1}, psi_{2,0}, ...`.
    Haar,
}

impl FromStr for BasisKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "shiftedlegendre" | "legendre" | "shiftlegendre" | "constant" => Ok(BasisKind::ShiftedLegendre),
            "karhunenloeve" | "kl" => Ok(BasisKind::KarhunenLoeve),
            "haar" => Ok(BasisKind::Haar),
            _ => Err(Error::Config(format!("unknown basis '{s}'"))),
        }
    }
}

impl fmt::Display for BasisKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BasisKind::ShiftedLegendre => "shifted_legendre",
            BasisKind::KarhunenLoeve => "karhunen_loeve",
            BasisKind::Haar => "haar",
        })
    }
}

/// `m` orthonormal functions on `[0, 1]` for each of `p` components, so
/// `theta` has `m * p` coefficients (component-major).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BasisSpec {
    pub kind: BasisKind,
    pub dim: usize,
    pub components: usize,
}

impl BasisSpec {
    pub fn new(kind: BasisKind, dim: usize, components: usize) -> Result<Self> {
        if dim == 0 || components == 0 {
            return Err(Error::InvalidParameter("basis needs dim >= 1 and components >= 1".into()));
        }
        Ok(BasisSpec { kind, dim, components })
    }

    /// One constant function per component.
    pub fn constant(components: usize) -> Self {
        BasisSpec { kind: BasisKind::ShiftedLegendre, dim: 1, components }
    }

    pub fn n_coeffs(&self) -> usize {
        self.dim * self.components
    }

    pub fn eval(&self, i: usize, t: f64) -> Result<f64> {
        if i >= self.dim {
            return Err(Error::InvalidParameter(format!("basis index {i} out of range (dim {})", self.dim)));
        }
        Ok(basis_eval(self.kind, i, t))
    }

    /// `theta(t)` for each component.
    pub fn theta_at(&self, coeffs: &[f64], t: f64) -> Vec<f64> {
        (0..self.components)
            .map(|c| (0..self.dim).map(|i| coeffs[c * self.dim + i] * basis_eval(self.kind, i, t)).sum())
            .collect()
    }
}

pub fn basis_eval(kind: BasisKind, i: usize, t: f64) -> f64 {
    match kind {
        BasisKind::ShiftedLegendre => {
            let u = 2.0 * t - 1.0;
            let (mut p0, mut p1) = (1.0, u);
            let p = match i {
                0 => 1.0,
                1 => u,
                _ => {
                    for n in 1..i {
                        let n = n as f64;
                        let p2 = ((2.0 * n + 1.0) * u * p1 - n * p0) / (n + 1.0);
                        p0 = p1;
                        p1 = p2;
                    }
                    p1
                }
            };
            (2.0 * i as f64 + 1.0).sqrt() * p
        }
        BasisKind::KarhunenLoeve => std::f64::consts::SQRT_2 * ((i as f64 + 0.5) * std::f64::consts::PI * t).sin(),
        BasisKind::Haar => {
            if i == 0 {
                return 1.0;
            }
            let level = usize::BITS - 1 - i.leading_zeros();
            let shift = (i - (1 << level)) as f64;
            let scale = (1u64 << level) as f64;
            let s = scale * t - shift;
            let mother = if (0.0..0.5).contains(&s) {
                1.0
            } else if (0.5..1.0).contains(&s) {
                -1.0
            } else {
                0.0
            };
            scale.sqrt() * mother
        }
    }
}

/// Basis values at the left Euler nodes, `values[k * m + i] = e_i(t_k / T)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisGrid {
    pub spec: BasisSpec,
    pub n_steps: usize,
    values: Vec<f64>,
    scale: f64,
}

impl BasisGrid {
    pub fn new(spec: BasisSpec, n_steps: usize, horizon: f64) -> Self {
        let m = spec.dim;
        let mut values = Vec::with_capacity(n_steps * m);
        for k in 0..n_steps {
            let s = k as f64 / n_steps as f64;
            values.extend((0..m).map(|i| basis_eval(spec.kind, i, s)));
        }
        // e_i(t/T) / sqrt(T) is orthonormal on [0, T].
        BasisGrid { spec, n_steps, values, scale: 1.0 / horizon.sqrt() }
    }

    pub fn e(&self, k: usize, i: usize) -> f64 {
        self.values[k * self.spec.dim + i] * self.scale
    }

    /// `theta_c(t_k)` for component `c`.
    pub fn theta(&self, coeffs: &[f64], k: usize, c: usize) -> f64 {
        let m = self.spec.dim;
        (0..m).map(|i| coeffs[c * m + i] * self.e(k, i)).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_values() {
        assert_eq!(basis_eval(BasisKind::KarhunenLoeve, 0, 0.0), 0.0);
        assert!((basis_eval(BasisKind::KarhunenLoeve, 0, 1.0) - 2f64.sqrt()).abs() < 1e-15);
        for &t in &[0.0, 0.3, 1.0] {
            assert_eq!(basis_eval(BasisKind::ShiftedLegendre, 0, t), 1.0);
            assert_eq!(basis_eval(BasisKind::Haar, 0, t), 1.0);
        }
        // P_2(u) = (3u^2 - 1)/2 at u = 2t - 1.
        let t: f64 = 0.8;
        let u = 2.0 * t - 1.0;
        assert!((basis_eval(BasisKind::ShiftedLegendre, 2, t) - 5f64.sqrt() * (1.5 * u * u - 0.5)).abs() < 1e-14);
        assert_eq!(basis_eval(BasisKind::Haar, 2, 0.1), 2f64.sqrt());
        assert_eq!(basis_eval(BasisKind::Haar, 2, 0.3), -(2f64.sqrt()));
        assert_eq!(basis_eval(BasisKind::Haar, 3, 0.3), 0.0);
        assert_eq!(basis_eval(BasisKind::Haar, 7, 0.9), -2.0);
    }

    #[test]
    fn index_out_of_range() {
        let b = BasisSpec::new(BasisKind::Haar, 4, 1).unwrap();
        assert!(b.eval(4, 0.5).is_err());
        assert!(b.eval(3, 0.5).is_ok());
    }

    #[test]
    fn parses_names() {
        assert_eq!("KL".parse::<BasisKind>().unwrap(), BasisKind::KarhunenLoeve);
        assert_eq!("shifted_legendre".parse::<BasisKind>().unwrap(), BasisKind::ShiftedLegendre);
        assert!("fourier".parse::<BasisKind>().is_err());
    }
}
