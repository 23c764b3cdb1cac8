//! Config-driven runners for the NIG, spark-spread and barrier tables.
//!
//! Every run is a pure function of its [`ExperimentConfig`], so the same
//! config and seed always give a byte-identical CSV.

mod config;

pub use config::{BarrierModel, BasisChoice, ExperimentConfig, ExperimentKind, NigSpec, DEFAULT_SEED};

use std::io::Write;

use crate::barrier::DownInCall;
use crate::distributions::{NigParams, NigVector};
use crate::error::{Error, Result};
use crate::mc_estimator::{two_stage, EstimatorReport, RmPlan};
use crate::path_engine::{BasisKind, BasisSpec, DriverPhi, FunctionalProblem, PathModel};
use crate::static_is::{
    CallPayoff, EsscherDriver, EsscherVariant, GrowthEnvelope, Payoff, SparkSpread, TranslationDriver, TranslationVariant,
};
use crate::stochastic_approx::{Reparam, StepSchedule};

/// One NIG call strike: translation and Esscher runs side by side.
#[derive(Debug, Clone)]
pub struct NigRow {
    pub strike: f64,
    pub translation: EstimatorReport,
    pub esscher: EstimatorReport,
}

#[derive(Debug, Clone)]
pub struct SparkRow {
    pub strike: f64,
    pub c: f64,
    pub translation: EstimatorReport,
    pub esscher: EstimatorReport,
}

#[derive(Debug, Clone)]
pub struct BarrierRow {
    pub basis: BasisChoice,
    pub spec: BasisSpec,
    pub strike: f64,
    pub barrier: f64,
    pub report: EstimatorReport,
}

#[derive(Debug, Clone)]
pub struct AdaptiveRow {
    pub strike: f64,
    pub barrier: f64,
    /// Driver `phi = (p_k, 1 - p_k)`, coefficients `(alpha, beta)`.
    pub adaptive: EstimatorReport,
    /// Trivial driver with a constant `theta`, for comparison.
    pub constant: EstimatorReport,
}

#[derive(Debug, Clone)]
pub enum ExperimentOutput {
    Nig(Vec<NigRow>),
    Spark(Vec<SparkRow>),
    Barrier(Vec<BarrierRow>),
    Adaptive(Vec<AdaptiveRow>),
}

fn f(v: f64) -> String {
    v.to_string()
}

/// Theta components as one `;`-separated field.
fn thetas(v: &[f64]) -> String {
    v.iter().map(|t| t.to_string()).collect::<Vec<_>>().join(";")
}

impl ExperimentOutput {
    pub fn header(&self) -> Vec<&'static str> {
        match self {
            ExperimentOutput::Nig(_) => vec![
                "strike", "mean", "ci95", "crude_var", "ratio_translation", "theta_translation", "ratio_esscher", "theta_esscher",
            ],
            ExperimentOutput::Spark(_) => vec![
                "strike", "c", "mean", "ci95", "crude_var", "ratio_translation", "theta_translation", "ratio_esscher", "theta_esscher",
            ],
            ExperimentOutput::Barrier(_) => {
                vec!["basis", "dim", "strike", "barrier", "mean", "ci95", "crude_mean", "crude_var", "ratio", "theta"]
            }
            ExperimentOutput::Adaptive(_) => vec![
                "strike", "barrier", "mean", "ci95", "is_var", "crude_var", "ratio_adaptive", "ratio_constant", "alpha", "beta",
            ],
        }
    }

    pub fn rows(&self) -> Vec<Vec<String>> {
        match self {
            ExperimentOutput::Nig(rows) => rows
                .iter()
                .map(|r| {
                    vec![
                        f(r.strike),
                        f(r.esscher.mean),
                        f(r.esscher.ci95_halfwidth),
                        f(r.translation.crude_variance),
                        f(r.translation.variance_ratio),
                        thetas(&r.translation.theta_star),
                        f(r.esscher.variance_ratio),
                        thetas(&r.esscher.theta_star),
                    ]
                })
                .collect(),
            ExperimentOutput::Spark(rows) => rows
                .iter()
                .map(|r| {
                    vec![
                        f(r.strike),
                        f(r.c),
                        f(r.esscher.mean),
                        f(r.esscher.ci95_halfwidth),
                        f(r.translation.crude_variance),
                        f(r.translation.variance_ratio),
                        thetas(&r.translation.theta_star),
                        f(r.esscher.variance_ratio),
                        thetas(&r.esscher.theta_star),
                    ]
                })
                .collect(),
            ExperimentOutput::Barrier(rows) => rows
                .iter()
                .map(|r| {
                    vec![
                        r.basis.to_string(),
                        r.spec.dim.to_string(),
                        f(r.strike),
                        f(r.barrier),
                        f(r.report.mean),
                        f(r.report.ci95_halfwidth),
                        f(r.report.crude_mean),
                        f(r.report.crude_variance),
                        f(r.report.variance_ratio),
                        thetas(&r.report.theta_star),
                    ]
                })
                .collect(),
            ExperimentOutput::Adaptive(rows) => rows
                .iter()
                .map(|r| {
                    vec![
                        f(r.strike),
                        f(r.barrier),
                        f(r.adaptive.mean),
                        f(r.adaptive.ci95_halfwidth),
                        f(r.adaptive.variance),
                        f(r.adaptive.crude_variance),
                        f(r.adaptive.variance_ratio),
                        f(r.constant.variance_ratio),
                        f(r.adaptive.theta_star[0]),
                        f(r.adaptive.theta_star[1]),
                    ]
                })
                .collect(),
        }
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(self.header())?;
        for row in self.rows() {
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    /// `basis, dim, t, theta_1..theta_p` at `points` times per barrier row.
    /// Only functional experiments with a trivial driver have a deterministic
    /// `theta(t)`.
    pub fn write_theta_processes<W: Write>(&self, horizon: f64, points: usize, out: W) -> Result<()> {
        let ExperimentOutput::Barrier(rows) = self else {
            return Err(Error::Config("theta processes exist only for barrier_bs / barrier_localvol".into()));
        };
        let mut w = csv::Writer::from_writer(out);
        let p = rows.first().map_or(1, |r| r.spec.components);
        let mut header = vec!["basis".to_string(), "dim".into(), "t".into()];
        header.extend((1..=p).map(|c| format!("theta_{c}")));
        w.write_record(&header)?;
        for r in rows {
            for (t, th) in theta_process(&r.spec, &r.report.theta_star, horizon, points) {
                let mut rec = vec![r.basis.to_string(), r.spec.dim.to_string(), f(t)];
                rec.extend(th.into_iter().map(f));
                w.write_record(&rec)?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// `theta(t)` on `[0, horizon]` at `points` equally spaced times, in the
/// scaling used by the Euler driver.
pub fn theta_process(spec: &BasisSpec, coeffs: &[f64], horizon: f64, points: usize) -> Vec<(f64, Vec<f64>)> {
    let scale = 1.0 / horizon.sqrt();
    (0..points)
        .map(|j| {
            let s = if points > 1 { j as f64 / (points - 1) as f64 } else { 0.0 };
            let th = spec.theta_at(coeffs, s).into_iter().map(|v| v * scale).collect();
            (s * horizon, th)
        })
        .collect()
}

fn nig(spec: NigSpec) -> Result<NigParams> {
    NigParams::new(spec.alpha, spec.beta, spec.delta, spec.mu).map_err(|e| Error::Config(e.to_string()))
}

fn schedule(a: f64, b: f64) -> Result<StepSchedule> {
    StepSchedule::harmonic(a, b).map_err(|e| Error::Config(e.to_string()))
}

/// Translation and Esscher two-stage runs on one NIG payoff.
fn static_pair<P: Payoff + Clone>(
    cfg: &ExperimentConfig,
    family: &NigVector,
    payoff: P,
    envelope: GrowthEnvelope,
) -> Result<(EstimatorReport, EstimatorReport)> {
    let d = family.coords().len();
    let mut theta0 = vec![0.0; d];
    theta0[0] = cfg.theta0;

    let tr = TranslationDriver::new(family.clone(), payoff.clone(), envelope, TranslationVariant::Theorem);
    let plan = RmPlan::new(schedule(cfg.translation_gain, cfg.translation_offset)?, theta0.clone(), cfg.rm_iters);
    let (translation, _) = two_stage(&tr, &tr, &plan, cfg.mc_iters, cfg.seed)?;

    // Keeps both theta and -theta inside the CGF domain.
    let scales = family.coords().iter().map(|c| c.beta() - c.alpha()).collect();
    let es = EsscherDriver::new(family.clone(), payoff, cfg.esscher_lambda, EsscherVariant::Numeric);
    let plan = RmPlan::new(schedule(cfg.esscher_gain, cfg.esscher_offset)?, theta0, cfg.rm_iters)
        .with_reparam(Reparam::squash(scales)?);
    let (esscher, _) = two_stage(&es, &es, &plan, cfg.mc_iters, cfg.seed)?;
    Ok((translation, esscher))
}

fn path_model(cfg: &ExperimentConfig) -> Result<PathModel> {
    let m = match cfg.model {
        BarrierModel::BlackScholes => PathModel::black_scholes(cfg.rate, cfg.sigma, cfg.x0, cfg.horizon, cfg.steps),
        BarrierModel::LocalVol => PathModel::local_vol(cfg.rate, cfg.sigma, cfg.lv_beta, cfg.x0, cfg.horizon, cfg.steps),
    };
    m.map_err(|e| Error::Config(e.to_string()))
}

fn functional_run(
    cfg: &ExperimentConfig,
    model: &PathModel,
    phi: DriverPhi,
    kind: BasisKind,
    dim: usize,
    payoff: DownInCall,
) -> Result<EstimatorReport> {
    let problem = FunctionalProblem::new(model.clone(), phi, kind, dim, payoff)?;
    let theta0 = vec![0.0; problem.basis().n_coeffs()];
    let plan = RmPlan::new(schedule(cfg.rm_gain, cfg.rm_offset())?, theta0, cfg.rm_iters);
    Ok(two_stage(&problem, &problem, &plan, cfg.mc_iters, cfg.seed)?.0)
}

fn down_in(cfg: &ExperimentConfig, strike: f64, barrier: f64) -> Result<DownInCall> {
    DownInCall::new(strike, barrier, cfg.rate).map_err(|e| Error::Config(e.to_string()))
}

/// Runs the whole table described by `cfg`. `progress(done, total)` is
/// called after every row.
pub fn run_experiment_with_progress(cfg: &ExperimentConfig, progress: &mut dyn FnMut(usize, usize)) -> Result<ExperimentOutput> {
    cfg.validate()?;
    match cfg.kind {
        ExperimentKind::NigCall => {
            let family = NigVector::single(nig(cfg.elec)?);
            let mut rows = Vec::new();
            for (i, &strike) in cfg.strikes.iter().enumerate() {
                let payoff = CallPayoff { notional: cfg.notional, strike };
                let (translation, esscher) = static_pair(cfg, &family, payoff, GrowthEnvelope::exponential(cfg.notional))?;
                rows.push(NigRow { strike, translation, esscher });
                progress(i + 1, cfg.strikes.len());
            }
            Ok(ExperimentOutput::Nig(rows))
        }
        ExperimentKind::SparkSpread => {
            let family = NigVector::new(vec![nig(cfg.elec)?, nig(cfg.gas)?]);
            let total = cfg.strikes.len() * cfg.spreads.len();
            let mut rows = Vec::new();
            for &strike in &cfg.strikes {
                for &c in &cfg.spreads {
                    let payoff = SparkSpread { notional: cfg.notional, c, strike };
                    // The spread is long the first coordinate only.
                    let envelope = GrowthEnvelope::exponential_in(cfg.notional, 0);
                    let (translation, esscher) = static_pair(cfg, &family, payoff, envelope)?;
                    rows.push(SparkRow { strike, c, translation, esscher });
                    progress(rows.len(), total);
                }
            }
            Ok(ExperimentOutput::Spark(rows))
        }
        ExperimentKind::BarrierBs | ExperimentKind::BarrierLocalVol => {
            let model = path_model(cfg)?;
            let bases = cfg.basis_rows();
            let total = bases.len() * cfg.strikes.len() * cfg.barriers.len();
            let mut rows = Vec::new();
            for &strike in &cfg.strikes {
                for &barrier in &cfg.barriers {
                    for &(basis, kind, dim) in &bases {
                        let payoff = down_in(cfg, strike, barrier)?;
                        let report = functional_run(cfg, &model, DriverPhi::Identity, kind, dim, payoff)?;
                        let spec = BasisSpec::new(kind, dim, 1)?;
                        rows.push(BarrierRow { basis, spec, strike, barrier, report });
                        progress(rows.len(), total);
                    }
                }
            }
            Ok(ExperimentOutput::Barrier(rows))
        }
        ExperimentKind::BarrierAdaptive => {
            let model = path_model(cfg)?;
            let pairs: Vec<(f64, f64)> = cfg
                .strikes
                .iter()
                .flat_map(|&k| cfg.barriers.iter().filter(move |&&l| l < k).map(move |&l| (k, l)))
                .collect();
            if pairs.is_empty() {
                return Err(Error::Config("no (strike, barrier) pair with barrier < strike".into()));
            }
            let mut rows = Vec::new();
            for &(strike, barrier) in &pairs {
                let phi = DriverPhi::BarrierSurvival { barrier };
                let adaptive = functional_run(cfg, &model, phi, BasisKind::ShiftedLegendre, 1, down_in(cfg, strike, barrier)?)?;
                let constant =
                    functional_run(cfg, &model, DriverPhi::Identity, BasisKind::ShiftedLegendre, 1, down_in(cfg, strike, barrier)?)?;
                rows.push(AdaptiveRow { strike, barrier, adaptive, constant });
                progress(rows.len(), pairs.len());
            }
            Ok(ExperimentOutput::Adaptive(rows))
        }
    }
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    run_experiment_with_progress(cfg, &mut |_, _| {})
}
