use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::path_engine::BasisKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    NigCall,
    SparkSpread,
    BarrierBs,
    BarrierLocalVol,
    BarrierAdaptive,
}

impl FromStr for ExperimentKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "nig_call" => Ok(ExperimentKind::NigCall),
            "spark_spread" => Ok(ExperimentKind::SparkSpread),
            "barrier_bs" => Ok(ExperimentKind::BarrierBs),
            "barrier_localvol" | "barrier_local_vol" => Ok(ExperimentKind::BarrierLocalVol),
            "barrier_adaptive" => Ok(ExperimentKind::BarrierAdaptive),
            other => Err(Error::Config(format!("unknown experiment kind '{other}'"))),
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ExperimentKind::NigCall => "nig_call",
            ExperimentKind::SparkSpread => "spark_spread",
            ExperimentKind::BarrierBs => "barrier_bs",
            ExperimentKind::BarrierLocalVol => "barrier_localvol",
            ExperimentKind::BarrierAdaptive => "barrier_adaptive",
        })
    }
}

impl ExperimentKind {
    /// `(M, N)` used by the published tables.
    pub fn paper_scale(self) -> (usize, usize) {
        match self {
            ExperimentKind::NigCall => (100_000, 1_000_000),
            ExperimentKind::SparkSpread => (300_000, 3_000_000),
            _ => (50_000, 500_000),
        }
    }

    /// Desk scale: `N` ten times smaller, and `M` too where that still converges.
    pub fn desk_scale(self) -> (usize, usize) {
        match self {
            ExperimentKind::NigCall => (10_000, 100_000),
            ExperimentKind::SparkSpread => (30_000, 300_000),
            _ => (50_000, 100_000),
        }
    }

    pub fn is_barrier(self) -> bool {
        matches!(self, ExperimentKind::BarrierBs | ExperimentKind::BarrierLocalVol | ExperimentKind::BarrierAdaptive)
    }
}

/// Deterministic basis entry of a barrier table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisChoice {
    Constant,
    Basis(BasisKind),
}

impl FromStr for BasisChoice {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        if s.trim().eq_ignore_ascii_case("constant") {
            Ok(BasisChoice::Constant)
        } else {
            Ok(BasisChoice::Basis(s.trim().parse()?))
        }
    }
}

impl fmt::Display for BasisChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BasisChoice::Constant => f.write_str("constant"),
            BasisChoice::Basis(k) => k.fmt(f),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BarrierModel {
    BlackScholes,
    LocalVol,
}

impl FromStr for BarrierModel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "bs" | "blackscholes" => Ok(BarrierModel::BlackScholes),
            "localvol" | "lv" => Ok(BarrierModel::LocalVol),
            other => Err(Error::Config(format!("unknown model '{other}'"))),
        }
    }
}

/// NIG parameters as given in a config, validated when a run starts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NigSpec {
    pub alpha: f64,
    pub beta: f64,
    pub delta: f64,
    pub mu: f64,
}

/// A flat experiment description. Every field has a default for its kind,
/// so a config file only needs `kind = ...`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub seed: u64,
    pub rm_iters: usize,
    pub mc_iters: usize,
    pub out: Option<PathBuf>,
    pub theta_out: Option<PathBuf>,
    pub theta_points: usize,

    pub notional: f64,
    pub strikes: Vec<f64>,
    pub spreads: Vec<f64>,
    pub elec: NigSpec,
    pub gas: NigSpec,
    pub theta0: f64,
    pub translation_gain: f64,
    pub translation_offset: f64,
    pub esscher_gain: f64,
    pub esscher_offset: f64,
    pub esscher_lambda: f64,

    pub model: BarrierModel,
    pub x0: f64,
    pub rate: f64,
    pub sigma: f64,
    pub lv_beta: f64,
    pub horizon: f64,
    pub steps: usize,
    pub barriers: Vec<f64>,
    pub bases: Vec<BasisChoice>,
    pub dims: Vec<usize>,
    pub rm_gain: f64,
    /// `None` means `10 * x0^2`.
    pub rm_offset: Option<f64>,
}

pub const DEFAULT_SEED: u64 = 1;

impl ExperimentConfig {
    pub fn new(kind: ExperimentKind) -> Self {
        let (rm_iters, mc_iters) = kind.desk_scale();
        let local = matches!(kind, ExperimentKind::BarrierLocalVol);
        let strikes = match kind {
            ExperimentKind::NigCall => vec![0.6, 0.8, 1.0, 1.2, 1.4],
            ExperimentKind::SparkSpread => vec![0.4, 0.6, 0.8],
            ExperimentKind::BarrierAdaptive => vec![85.0, 95.0, 105.0, 115.0],
            _ => vec![115.0],
        };
        let barriers = match kind {
            ExperimentKind::BarrierAdaptive => vec![65.0, 75.0, 85.0, 95.0],
            _ => vec![65.0],
        };
        ExperimentConfig {
            kind,
            seed: DEFAULT_SEED,
            rm_iters,
            mc_iters,
            out: None,
            theta_out: None,
            theta_points: 1000,
            notional: 50.0,
            strikes,
            spreads: vec![0.2, 0.4, 0.6, 0.8, 1.0],
            elec: NigSpec { alpha: 2.0, beta: 0.2, delta: 0.8, mu: 0.04 },
            gas: NigSpec { alpha: 1.4, beta: 0.2, delta: 0.2, mu: 0.04 },
            theta0: 1.0,
            translation_gain: if kind == ExperimentKind::SparkSpread { 0.2 } else { 0.5 },
            translation_offset: 1000.0,
            esscher_gain: 0.01,
            esscher_offset: 10_000.0,
            esscher_lambda: 4.0,
            model: if local { BarrierModel::LocalVol } else { BarrierModel::BlackScholes },
            x0: 100.0,
            rate: 0.04,
            sigma: if local { 7.0 } else { 0.7 },
            lv_beta: 0.5,
            horizon: 1.0,
            steps: 100,
            barriers,
            bases: vec![
                BasisChoice::Constant,
                BasisChoice::Basis(BasisKind::ShiftedLegendre),
                BasisChoice::Basis(BasisKind::KarhunenLoeve),
                BasisChoice::Basis(BasisKind::Haar),
            ],
            dims: vec![2, 4, 8],
            rm_gain: 1.0,
            rm_offset: None,
        }
    }

    /// Parses `key = value` lines; `#` starts a comment. `kind` must appear
    /// before any kind-dependent key is applied, so it is read first.
    pub fn parse(text: &str) -> Result<Self> {
        let mut pairs = Vec::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", no + 1)))?;
            pairs.push((k.trim().to_string(), v.trim().to_string()));
        }
        let kind = pairs
            .iter()
            .find(|(k, _)| k == "kind")
            .ok_or_else(|| Error::Config("missing 'kind'".into()))?
            .1
            .parse()?;
        let mut cfg = ExperimentConfig::new(kind);
        for (k, v) in pairs.iter().filter(|(k, _)| k != "kind") {
            cfg.set(k, v)?;
        }
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Applies one override. Keys match the config file keys.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "seed" => self.seed = num(key, value)?,
            "rm_iters" => self.rm_iters = num(key, value)?,
            "mc_iters" => self.mc_iters = num(key, value)?,
            "paper_scale" => {
                if num::<bool>(key, value)? {
                    (self.rm_iters, self.mc_iters) = self.kind.paper_scale();
                }
            }
            "out" => self.out = Some(PathBuf::from(value)),
            "theta_out" => self.theta_out = Some(PathBuf::from(value)),
            "theta_points" => self.theta_points = num(key, value)?,
            "notional" => self.notional = num(key, value)?,
            "strike" | "strikes" => self.strikes = list(key, value)?,
            "c" | "spreads" => self.spreads = list(key, value)?,
            "alpha" => self.elec.alpha = num(key, value)?,
            "beta" => self.elec.beta = num(key, value)?,
            "delta" => self.elec.delta = num(key, value)?,
            "mu" => self.elec.mu = num(key, value)?,
            "gas_alpha" => self.gas.alpha = num(key, value)?,
            "gas_beta" => self.gas.beta = num(key, value)?,
            "gas_delta" => self.gas.delta = num(key, value)?,
            "gas_mu" => self.gas.mu = num(key, value)?,
            "theta0" => self.theta0 = num(key, value)?,
            "translation_gain" => self.translation_gain = num(key, value)?,
            "translation_offset" => self.translation_offset = num(key, value)?,
            "esscher_gain" => self.esscher_gain = num(key, value)?,
            "esscher_offset" => self.esscher_offset = num(key, value)?,
            "esscher_lambda" => self.esscher_lambda = num(key, value)?,
            "model" => self.model = value.parse()?,
            "x0" => self.x0 = num(key, value)?,
            "rate" | "r" => self.rate = num(key, value)?,
            "sigma" => self.sigma = num(key, value)?,
            "lv_beta" => self.lv_beta = num(key, value)?,
            "horizon" | "maturity" => self.horizon = num(key, value)?,
            "steps" => self.steps = num(key, value)?,
            "barrier" | "barriers" => self.barriers = list(key, value)?,
            "basis" | "bases" => self.bases = value.split(',').map(str::parse).collect::<Result<_>>()?,
            "dim" | "dims" => self.dims = list(key, value)?,
            "rm_gain" => self.rm_gain = num(key, value)?,
            "rm_offset" => self.rm_offset = Some(num(key, value)?),
            "kind" => {
                let kind: ExperimentKind = value.parse()?;
                if kind != self.kind {
                    return Err(Error::Config(format!("kind cannot change from {} to {kind}", self.kind)));
                }
            }
            other => return Err(Error::Config(format!("unknown key '{other}'"))),
        }
        Ok(())
    }

    /// Checks everything that does not need a model to be built.
    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if self.rm_iters == 0 || self.mc_iters < 2 {
            return fail(format!("need rm_iters >= 1 and mc_iters >= 2 (got {}, {})", self.rm_iters, self.mc_iters));
        }
        if self.strikes.is_empty() {
            return fail("no strikes".into());
        }
        if self.kind == ExperimentKind::SparkSpread && self.spreads.is_empty() {
            return fail("no spread coefficients".into());
        }
        if self.kind.is_barrier() {
            if self.barriers.is_empty() {
                return fail("no barriers".into());
            }
            if let Some(d) = self.dims.iter().find(|d| ![1, 2, 4, 8].contains(*d)) {
                return fail(format!("basis dimension {d} not in {{1, 2, 4, 8}}"));
            }
            if self.bases.is_empty() || self.dims.is_empty() {
                return fail("no basis / dimension".into());
            }
            if self.steps == 0 || !(self.horizon > 0.0) || !(self.x0 > 0.0) || !(self.sigma > 0.0) {
                return fail("barrier model needs steps >= 1 and positive horizon, x0, sigma".into());
            }
        }
        if self.theta_points < 2 {
            return fail("theta_points must be at least 2".into());
        }
        Ok(())
    }

    pub fn rm_offset(&self) -> f64 {
        self.rm_offset.unwrap_or(10.0 * self.x0 * self.x0)
    }

    /// `(basis, dim)` rows of a barrier table: the constant basis once, then
    /// each basis at each dimension.
    pub fn basis_rows(&self) -> Vec<(BasisChoice, BasisKind, usize)> {
        let mut rows = Vec::new();
        for &b in &self.bases {
            match b {
                BasisChoice::Constant => rows.push((b, BasisKind::ShiftedLegendre, 1)),
                BasisChoice::Basis(kind) => rows.extend(self.dims.iter().map(|&d| (b, kind, d))),
            }
        }
        rows
    }
}

fn num<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value.trim().parse().map_err(|_| Error::Config(format!("bad value '{value}' for '{key}'")))
}

fn list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value.split(',').map(|v| num(key, v)).collect()
}
