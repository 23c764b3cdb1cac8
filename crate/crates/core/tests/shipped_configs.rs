//! Runs every config under `configs/` as shipped.

use std::path::PathBuf;

use isrm::experiments::{run_experiment, ExperimentConfig, ExperimentOutput};
use isrm::mc_estimator::EstimatorReport;

fn config(name: &str) -> ExperimentConfig {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name);
    ExperimentConfig::from_file(&path).unwrap()
}

fn check(label: &str, r: &EstimatorReport) {
    assert!(r.variance_ratio >= 0.9, "{label}: ratio {}", r.variance_ratio);
    let pooled = ((r.variance + r.crude_variance) / r.n_mc as f64).sqrt();
    assert!((r.mean - r.crude_mean).abs() <= 3.0 * pooled, "{label}: {} vs crude {}", r.mean, r.crude_mean);
}

fn run(name: &str, rows: usize) -> ExperimentOutput {
    let out = run_experiment(&config(name)).unwrap();
    assert_eq!(out.rows().len(), rows, "{name}");
    match &out {
        ExperimentOutput::Nig(v) => v.iter().for_each(|r| {
            check(&format!("K={} translation", r.strike), &r.translation);
            check(&format!("K={} esscher", r.strike), &r.esscher);
        }),
        ExperimentOutput::Spark(v) => v.iter().for_each(|r| {
            check(&format!("K={} c={} translation", r.strike, r.c), &r.translation);
            check(&format!("K={} c={} esscher", r.strike, r.c), &r.esscher);
        }),
        ExperimentOutput::Barrier(v) => v.iter().for_each(|r| check(&format!("{} {}", r.basis, r.spec.dim), &r.report)),
        ExperimentOutput::Adaptive(v) => v.iter().for_each(|r| {
            check(&format!("K={} L={} adaptive", r.strike, r.barrier), &r.adaptive);
            check(&format!("K={} L={} constant", r.strike, r.barrier), &r.constant);
        }),
    }
    out
}

fn csv(out: &ExperimentOutput) -> Vec<u8> {
    let mut buf = Vec::new();
    out.write_csv(&mut buf).unwrap();
    buf
}

#[test]
fn nig_call_table() {
    let out = run("table1_nig_call.conf", 5);
    assert_eq!(csv(&out), csv(&run_experiment(&config("table1_nig_call.conf")).unwrap()));
}

#[test]
fn spark_spread_table() {
    run("table2_spark_spread.conf", 15);
}

#[test]
fn barrier_black_scholes_table() {
    run("table3_barrier_bs.conf", 10);
}

#[test]
fn barrier_local_vol_table() {
    run("table4_barrier_localvol.conf", 10);
}

#[test]
fn adaptive_black_scholes_table() {
    run("table5_adaptive_bs.conf", 13);
}

#[test]
fn adaptive_local_vol_table() {
    run("table6_adaptive_localvol.conf", 13);
}
