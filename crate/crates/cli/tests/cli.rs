use std::path::PathBuf;
use std::process::{Command, Output};

fn isrm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_isrm")).env_remove("ISRM_SEED").args(args).output().unwrap()
}

fn config(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name).display().to_string()
}

const SMALL_NIG: &[&str] = &["nig-call", "-q", "--strike", "1.0", "--rm-iters", "2000", "--mc-iters", "5000"];

#[test]
fn config_errors_exit_with_code_3() {
    let bad_key = isrm(&[SMALL_NIG, &["--set", "no_such_key=1"]].concat());
    assert_eq!(bad_key.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&bad_key.stderr).contains("no_such_key"));

    let dir = std::env::temp_dir().join(format!("isrm-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let broken = dir.join("broken.conf");
    std::fs::write(&broken, "kind = nig_call\nstrikes\n").unwrap();
    assert_eq!(isrm(&["run", "-c", broken.to_str().unwrap()]).status.code(), Some(3));
    assert_eq!(isrm(&["run", "-c", dir.join("missing.conf").to_str().unwrap()]).status.code(), Some(3));

    let mismatch = isrm(&["barrier-bs", "-c", &config("table1_nig_call.conf")]);
    assert_eq!(mismatch.status.code(), Some(3));
    let theta = isrm(&["theta-process", "-c", &config("table5_adaptive_bs.conf")]);
    assert_eq!(theta.status.code(), Some(3));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn same_seed_gives_identical_csv() {
    let a = isrm(SMALL_NIG);
    let b = isrm(SMALL_NIG);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "strike,mean,ci95,crude_var,ratio_translation,theta_translation,ratio_esscher,theta_esscher");
    assert_eq!(lines.len(), 2);
}

#[test]
fn seed_env_var_changes_the_output() {
    let base = isrm(SMALL_NIG);
    let env = Command::new(env!("CARGO_BIN_EXE_isrm")).env("ISRM_SEED", "77").args(SMALL_NIG).output().unwrap();
    let flag = isrm(&[SMALL_NIG, &["--seed", "77"]].concat());
    assert!(env.status.success());
    assert_ne!(base.stdout, env.stdout);
    assert_eq!(env.stdout, flag.stdout);
}

#[test]
fn theta_process_writes_one_block_per_basis_row() {
    let out = isrm(&[
        "theta-process", "-q", "-c", &config("table3_barrier_bs.conf"), "--basis", "constant,haar", "--dim", "2",
        "--rm-iters", "500", "--mc-iters", "1000",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "basis,dim,t,theta_1");
    assert_eq!(lines.len(), 1 + 2 * 1000);
}
