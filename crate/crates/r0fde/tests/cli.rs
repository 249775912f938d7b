//! End-to-end checks of the binary against the shipped config files.

use std::path::PathBuf;
use std::process::{Command, Output};

fn config(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_r0fde"))
        .args(args)
        .output()
        .expect("binary should run")
}

fn json_stdout(out: &Output) -> serde_json::Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout should be JSON")
}

#[test]
fn r0_scalar_direct() {
    let spec = config("scalar_beta2.json");
    let out = run(&["r0", spec.to_str().unwrap()]);
    let v = json_stdout(&out);
    assert!((v["r0_direct"].as_f64().unwrap() - 2.0).abs() < 1e-12);
    assert!(v["threshold_sign_consistent"].as_bool().unwrap());
}

#[test]
fn r0_tick_both_methods_agree() {
    let spec = config("r0_above.json");
    let out = run(&["r0", spec.to_str().unwrap(), "--method", "both"]);
    let v = json_stdout(&out);
    let direct = v["r0_direct"].as_f64().unwrap();
    let bisect = v["r0_bisection"].as_f64().unwrap();
    assert!((direct - 1.5).abs() < 1e-12);
    assert!((bisect - direct).abs() < 1e-3);
    assert!(v["bisection_consistent"].as_bool().unwrap());
}

#[test]
fn tick_equilibrium_reports_chain() {
    let out = run(&["tick-equilibrium", config("r0_above.json").to_str().unwrap()]);
    let v = json_stdout(&out);
    assert!((v["r0"].as_f64().unwrap() - 1.5).abs() < 1e-12);
    // L* = h (R0 - 1) with h = 1.
    assert!((v["equilibrium"]["l"].as_f64().unwrap() - 0.5).abs() < 1e-12);

    let out = run(&["tick-equilibrium", config("r0_below.json").to_str().unwrap()]);
    let v = json_stdout(&out);
    assert!(v["equilibrium"].is_null());
}

#[test]
fn stability_scalar() {
    let out = run(&["stability", config("scalar_beta2.json").to_str().unwrap()]);
    let v = json_stdout(&out);
    // F - V has s_hat = 2 - 1 = 1 and the suite must find both positive.
    assert!((v["s_hat"].as_f64().unwrap() - 1.0).abs() < 1e-10);
    assert!(v["s_L"].as_f64().unwrap() > 0.0);
    assert!(v["consistent"].as_bool().unwrap());
}

#[test]
fn simulate_zero_history_stays_zero() {
    let out = run(&[
        "simulate",
        config("r0_above.json").to_str().unwrap(),
        "--init",
        "const:0,0,0,0",
        "--T",
        "5",
    ]);
    assert!(out.status.success());
    let csv = String::from_utf8(out.stdout).unwrap();
    let last = csv.lines().last().unwrap();
    let fields: Vec<f64> = last.split(',').map(|s| s.parse().unwrap()).collect();
    assert_eq!(fields.len(), 5);
    for &u in &fields[1..] {
        assert_eq!(u, 0.0);
    }
}

#[test]
fn verify_is_deterministic_per_seed() {
    let spec = config("scalar_beta2.json");
    let args = ["verify", spec.to_str().unwrap(), "--suite", "theorem2.1", "--seed", "7"];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn verify_all_passes_on_tick_spec() {
    let out = run(&["verify", config("r0_below.json").to_str().unwrap()]);
    let v = json_stdout(&out);
    assert!(v["pass"].as_bool().unwrap(), "{v}");
}

#[test]
fn malformed_spec_exits_2() {
    let dir = std::env::temp_dir().join("r0fde_cli_test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("broken.json");
    std::fs::write(&path, "{ not json").unwrap();
    let out = run(&["r0", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn assumption_violation_exits_2_unless_forced() {
    let dir = std::env::temp_dir().join("r0fde_cli_test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("negative_f.json");
    std::fs::write(
        &path,
        r#"{
            "m": 1,
            "F": { "A0": [[-1.0]], "delayed": [] },
            "V": { "A0": [[1.0]], "delayed": [] }
        }"#,
    )
    .unwrap();
    let out = run(&["r0", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));

    let out = run(&["r0", path.to_str().unwrap(), "--force"]);
    assert!(out.status.success());
}
