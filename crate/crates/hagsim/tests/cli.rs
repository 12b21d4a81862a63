use std::path::Path;
use std::process::{Command, Output};

use hagsim_core::harness::ExperimentConfig;

fn hagsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hagsim"))
        .args(args)
        .output()
        .expect("spawn hagsim")
}

fn write_config(dir: &Path, edit: impl FnOnce(&mut serde_json::Value)) -> String {
    let mut v = serde_json::to_value(ExperimentConfig::testbed()).unwrap();
    v["workloads"][0]["transfer_bytes"] = 1_000_000.into();
    edit(&mut v);
    let policies = serde_json::to_string(&ExperimentConfig::default_policies()).unwrap();
    std::fs::write(dir.join("policy.json"), policies).unwrap();
    let path = dir.join("cfg.json");
    std::fs::write(&path, v.to_string()).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn run_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), |_| {});
    let out = dir.path().join("out");
    let o = hagsim(&["run", "--config", &cfg, "--seed", "4", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["trace.csv", "rates.csv", "summary.json"] {
        assert!(out.join(f).is_file(), "missing {f}");
    }
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["seed"], 4);
    assert_eq!(summary["flows"][0]["delivered_bytes"], 1_000_000);
}

#[test]
fn bad_config_exits_2_and_names_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), |v| v["accesses"][0]["uplink"]["owd_ms"] = "slow".into());
    let o = hagsim(&["run", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("accesses[0].uplink.owd_ms"), "{err}");
}

#[test]
fn incomplete_run_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), |v| v["t_end_ms"] = 5000.into());
    let o = hagsim(&["failover", "--config", &cfg, "--kill-at", "20", "--kill", "fbb,mbb"]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).contains("incomplete"));
}

#[test]
fn fig6_reports_three_modes() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("fig6.json");
    let o = hagsim(&[
        "fig6",
        "--app",
        "wget",
        "--transfer-bytes",
        "200000",
        "--json",
        json.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8_lossy(&o.stdout);
    for mode in ["fbb-only", "mbb-only", "fmc"] {
        assert!(stdout.contains(mode), "{stdout}");
    }
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(json).unwrap()).unwrap();
    assert_eq!(v["runs"].as_array().unwrap().len(), 3);
}

#[test]
fn unknown_kill_target_is_a_config_error() {
    let o = hagsim(&[
        "failover",
        "--kill-at",
        "100",
        "--kill",
        "wifi",
        "--transfer-bytes",
        "10000",
    ]);
    assert_eq!(o.status.code(), Some(2));
}
