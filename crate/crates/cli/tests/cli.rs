use std::process::{Command, Output};

use serde_json::Value;

fn wvnn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wvnn"))
        .args(args)
        .output()
        .expect("spawn wvnn")
}

fn json_stdout(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

#[test]
fn sigma_y_is_purely_imaginary() {
    let o = wvnn(&["weak-value", "--obs", "pauli:y", "--theta-i", "0.3", "--theta-f", "0.5"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json_stdout(&o);
    assert!(v["value"]["re"].as_f64().unwrap().abs() < 1e-15);
    // tan(θf − θi)
    assert!((v["value"]["im"].as_f64().unwrap() - 0.2f64.tan()).abs() < 1e-12);
    assert_eq!(v["tags"], serde_json::json!(["anomalous-complex"]));
}

#[test]
fn aligned_sigma_z_is_in_range() {
    let o = wvnn(&["weak-value", "--obs", "pauli:z", "--theta-i", "0", "--theta-f", "0"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json_stdout(&o);
    assert!((v["value"]["re"].as_f64().unwrap() - 1.0).abs() < 1e-15);
    assert_eq!(v["tags"], serde_json::json!(["in-range"]));
}

#[test]
fn qutrit_flags_are_used() {
    let o = wvnn(&[
        "weak-value",
        "--obs",
        "gellmann:5",
        "--theta-i",
        "pi/5",
        "--alpha-i",
        "pi/8",
        "--chi1-i",
        "pi/7",
        "--theta-f",
        "pi/4",
        "--alpha-f",
        "pi/3",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(json_stdout(&o)["modulus"].as_f64().unwrap().is_finite());
}

#[test]
fn orthogonal_states_exit_2() {
    let o = wvnn(&["weak-value", "--obs", "pauli:x", "--theta-i", "0", "--theta-f", "pi/2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("post-selection"));
}

#[test]
fn usage_errors_exit_1() {
    assert_eq!(wvnn(&["weak-value", "--obs", "pauli:x"]).status.code(), Some(1));
    assert_eq!(
        wvnn(&["weak-value", "--obs", "pauli:q", "--theta-i", "0", "--theta-f", "0"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(wvnn(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(wvnn(&["--help"]).status.code(), Some(0));
}

#[test]
fn zero_step_grid_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let o = wvnn(&[
        "sweep",
        "--preset",
        "fig2",
        "--theta-i",
        "0,pi/2,0",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn sweep_flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(
        &cfg,
        "kind = grid\nobservable = pauli:x\ntheta_i = 0, pi/2, 11\ntheta_f = 0, pi/2, 11\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    std::fs::create_dir(&out).unwrap();
    let o = wvnn(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--obs",
        "pauli:z",
        "--theta-f",
        "0,pi/2,7",
        "--id",
        "t",
        "--format",
        "json",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v = json_stdout(&o);
    assert_eq!(v["summary"]["points"], "77");
    let first = v["files"][0].as_str().unwrap();
    assert!(first.contains("pauli-z"), "{first}");
    let table: Value = serde_json::from_str(&std::fs::read_to_string(first).unwrap()).unwrap();
    assert!(table.is_object());
}

#[test]
fn sweep_is_deterministic_across_thread_counts() {
    let run = |threads: &str| {
        let dir = tempfile::tempdir().unwrap();
        let o = Command::new(env!("CARGO_BIN_EXE_wvnn"))
            .env("WVNN_THREADS", threads)
            .args([
                "sweep",
                "--preset",
                "fig7",
                "--set",
                "theta=0,pi/2,101",
                "--out",
                dir.path().to_str().unwrap(),
            ])
            .output()
            .unwrap();
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        let v = json_stdout(&o);
        let path = v["files"][0].as_str().unwrap().to_string();
        std::fs::read(path).unwrap()
    };
    assert_eq!(run("1"), run("3"));
}

#[test]
fn bad_thread_count_is_usage_error() {
    let o = Command::new(env!("CARGO_BIN_EXE_wvnn"))
        .env("WVNN_THREADS", "many")
        .args(["verify", "--samples", "1"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn meter_recovers_real_weak_value() {
    let o = wvnn(&["meter", "--obs", "pauli:x", "--theta-i", "0.3", "--theta-f", "0.5"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v = json_stdout(&o);
    let expect = 0.8f64.sin() / 0.2f64.cos();
    assert!((v["re_est"].as_f64().unwrap() - expect).abs() < 1e-3, "{v}");
    assert_eq!(v["records"].as_array().unwrap().len(), 3);
}

#[test]
fn meter_grid_overflow_hints() {
    let o = wvnn(&[
        "meter",
        "--obs",
        "pauli:x",
        "--theta-i",
        "0.3",
        "--theta-f",
        "0.5",
        "--gamma-ladder",
        "50,40,30",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--x-extent"));
}

#[test]
fn verify_passes_and_fault_fails() {
    let ok = wvnn(&["verify", "--samples", "10", "--report", "json"]);
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stdout));
    let report = json_stdout(&ok);
    assert_eq!(report["passed"], true);
    assert!(report["checks"].as_array().unwrap().len() > 10);

    let bad = wvnn(&["verify", "--samples", "10", "--inject-fault"]);
    assert_eq!(bad.status.code(), Some(3));
    let text = String::from_utf8_lossy(&bad.stdout);
    assert_eq!(text.lines().filter(|l| l.starts_with("FAIL")).count(), 1);
    assert!(text.contains("replay:"));
}

#[test]
fn verify_report_is_reproducible() {
    let a = wvnn(&["verify", "--samples", "5", "--seed", "7", "--report", "json"]);
    let b = wvnn(&["verify", "--samples", "5", "--seed", "7", "--report", "json"]);
    assert_eq!(a.stdout, b.stdout);
}
