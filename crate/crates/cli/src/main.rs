use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use isrm::experiments::{run_experiment_with_progress, ExperimentConfig, ExperimentKind, ExperimentOutput};
use isrm::Error;

/// Robbins-Monro importance sampling experiments. Writes one CSV row per
/// table entry.
#[derive(Parser, Debug)]
#[command(name = "isrm", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Call on a NIG log-price: translation vs Esscher.
    NigCall(Overrides),
    /// Spread between two independent NIG log-prices.
    SparkSpread(Overrides),
    /// Down & In call under Black-Scholes, one row per basis and dimension.
    BarrierBs(Overrides),
    /// Down & In call under the local volatility model.
    BarrierLocalvol(Overrides),
    /// Down & In call with the barrier-survival driver.
    BarrierAdaptive(Overrides),
    /// Run whatever a config file describes (`--config` required).
    Run(Overrides),
    /// Write the optimized theta(t) of a barrier config.
    ThetaProcess(Overrides),
}

#[derive(Args, Debug)]
struct Overrides {
    /// Flat `key = value` config file.
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Strike(s), comma separated.
    #[arg(long)]
    strike: Option<String>,
    /// Barrier level(s), comma separated.
    #[arg(long)]
    barrier: Option<String>,
    /// Basis list: constant, shifted_legendre, kl, haar.
    #[arg(long)]
    basis: Option<String>,
    /// Basis dimension(s) in {1, 2, 4, 8}.
    #[arg(long)]
    dim: Option<String>,
    #[arg(long)]
    rm_iters: Option<usize>,
    #[arg(long)]
    mc_iters: Option<usize>,
    #[arg(long, env = "ISRM_SEED")]
    seed: Option<u64>,
    /// CSV output path; stdout when absent.
    #[arg(short, long)]
    out: Option<PathBuf>,
    /// Use the iteration counts of the published tables.
    #[arg(long)]
    paper_scale: bool,
    /// Where `theta-process` writes; defaults to stdout.
    #[arg(long)]
    theta_out: Option<PathBuf>,
    /// Any other config key, as `key=value`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(short, long)]
    quiet: bool,
}

fn build_config(kind: Option<ExperimentKind>, o: &Overrides) -> Result<ExperimentConfig, Error> {
    let mut cfg = match (&o.config, kind) {
        (Some(path), _) => {
            let cfg = ExperimentConfig::from_file(path)?;
            if let Some(k) = kind {
                if cfg.kind != k {
                    return Err(Error::Config(format!("{} describes {}, not {k}", path.display(), cfg.kind)));
                }
            }
            cfg
        }
        (None, Some(k)) => ExperimentConfig::new(k),
        (None, None) => return Err(Error::Config("--config is required here".into())),
    };
    if o.paper_scale {
        cfg.set("paper_scale", "true")?;
    }
    for kv in &o.set {
        let (k, v) = kv.split_once('=').ok_or_else(|| Error::Config(format!("--set expects key=value, got '{kv}'")))?;
        cfg.set(k.trim(), v.trim())?;
    }
    let flags = [
        ("strike", o.strike.clone()),
        ("barrier", o.barrier.clone()),
        ("basis", o.basis.clone()),
        ("dim", o.dim.clone()),
        ("rm_iters", o.rm_iters.map(|v| v.to_string())),
        ("mc_iters", o.mc_iters.map(|v| v.to_string())),
        ("seed", o.seed.map(|v| v.to_string())),
    ];
    for (k, v) in flags {
        if let Some(v) = v {
            cfg.set(k, &v)?;
        }
    }
    if let Some(p) = &o.out {
        cfg.out = Some(p.clone());
    }
    if let Some(p) = &o.theta_out {
        cfg.theta_out = Some(p.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}

fn sink(path: &Option<PathBuf>) -> Result<Box<dyn Write>, Error> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn execute(cli: Cli) -> Result<(), Error> {
    let (kind, o, theta_only) = match &cli.command {
        Command::NigCall(o) => (Some(ExperimentKind::NigCall), o, false),
        Command::SparkSpread(o) => (Some(ExperimentKind::SparkSpread), o, false),
        Command::BarrierBs(o) => (Some(ExperimentKind::BarrierBs), o, false),
        Command::BarrierLocalvol(o) => (Some(ExperimentKind::BarrierLocalVol), o, false),
        Command::BarrierAdaptive(o) => (Some(ExperimentKind::BarrierAdaptive), o, false),
        Command::Run(o) => (None, o, false),
        Command::ThetaProcess(o) => (None, o, true),
    };
    let cfg = build_config(kind, o)?;
    if theta_only && !matches!(cfg.kind, ExperimentKind::BarrierBs | ExperimentKind::BarrierLocalVol) {
        return Err(Error::Config(format!("theta-process needs barrier_bs or barrier_localvol, got {}", cfg.kind)));
    }
    let quiet = o.quiet;
    if !quiet {
        eprintln!("{}: M = {}, N = {}, seed = {}", cfg.kind, cfg.rm_iters, cfg.mc_iters, cfg.seed);
    }
    let mut progress = |done: usize, total: usize| {
        if !quiet {
            eprintln!("  row {done}/{total}");
        }
    };
    let output: ExperimentOutput = run_experiment_with_progress(&cfg, &mut progress)?;
    if theta_only {
        output.write_theta_processes(cfg.horizon, cfg.theta_points, sink(&cfg.theta_out.clone().or(cfg.out.clone()))?)?;
        return Ok(());
    }
    output.write_csv(sink(&cfg.out)?)?;
    if let Some(path) = &cfg.theta_out {
        if matches!(output, ExperimentOutput::Barrier(_)) {
            output.write_theta_processes(cfg.horizon, cfg.theta_points, BufWriter::new(File::create(path)?))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Diverged { .. } => 2,
                Error::Config(_) => 3,
                _ => 1,
            })
        }
    }
}
