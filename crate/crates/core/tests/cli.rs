use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn models() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../models")
}

fn model(name: &str) -> String {
    models().join(name).display().to_string()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_suffbench")).args(args).output().expect("binary runs")
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

#[test]
fn exit_codes_follow_the_verdict() {
    let ok = run(&["check-sufficiency", "--model", &model("fam_bin.json")]);
    assert_eq!(ok.status.code(), Some(0));
    assert_eq!(report(&ok)["verdicts"][0]["pass"], true);

    let parity = model("fam_bin_parity.json");
    let failed = run(&["check-sufficiency", "--model", &model("fam_bin.json"), "--statistic", &parity]);
    assert_eq!(failed.status.code(), Some(1));
    let r = report(&failed);
    assert_eq!(r["error"]["code"], "CHECK_FAILED");
    assert!(r["verdicts"][0]["value"].as_f64().unwrap() > 0.05);

    let usage = run(&["check-sufficiency", "--no-such-flag"]);
    assert_eq!(usage.status.code(), Some(2));
    assert!(usage.stdout.is_empty());

    let missing = run(&["check-sufficiency", "--model", "/nonexistent/model.json"]);
    assert_eq!(missing.status.code(), Some(3));
    assert_eq!(report(&missing)["exit_code"], 3);

    let help = run(&["--help"]);
    assert_eq!(help.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&help.stdout).contains("selftest"));
}

#[test]
fn precondition_failure_is_a_model_error() {
    let bad = model("noisy_copy_bad_stat.json");
    let out = run(&["rd-equality", "--model", &model("noisy_copy.json"), "--statistic", &bad]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(report(&out)["error"]["code"], "PRECONDITION_FAILED");
}

#[test]
fn minimal_stat_reports_classes() {
    let out = run(&["minimal-stat", "--model", &model("fam_bin.json")]);
    assert_eq!(out.status.code(), Some(0));
    let text = report(&out).to_string();
    assert!(text.contains("00|01,10|11"), "{text}");
}

#[test]
fn reports_and_csv_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().display().to_string();
    let args = ["sim-gaussian", "--trials", "2000", "--seed", "9", "--out", &out];
    let first = run(&args);
    let csv1 = std::fs::read(dir.path().join("gaussian_trials.csv")).unwrap();
    let second = run(&args);
    let csv2 = std::fs::read(dir.path().join("gaussian_trials.csv")).unwrap();
    assert_eq!(first.status.code(), Some(0));
    assert_eq!(first.stdout, second.stdout);
    assert_eq!(csv1, csv2);

    let other = run(&["sim-gaussian", "--trials", "2000", "--seed", "10"]);
    assert_ne!(report(&first)["result"], report(&other)["result"]);
}

#[test]
fn frontier_is_reproducible_for_a_seed() {
    let args = ["ak-frontier", "--model", &model("ab_pair.json"), "--budget", "20", "--seed", "3"];
    let (a, b) = (run(&args), run(&args));
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn rd_curve_csv_layout() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().display().to_string();
    let r = run(&["rd-curve", "--model", &model("bernoulli_rd.json"), "--dgrid", "0:0.5:3", "--out", &out]);
    assert_eq!(r.status.code(), Some(0));
    let text = std::fs::read_to_string(dir.path().join("rd_curve.csv")).unwrap();
    assert!(!text.contains('\r'));
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "D,R_bits,converged");
    assert_eq!(lines.len(), 4);
    assert_eq!(lines[1], "0.0,1.0,true");
    assert_eq!(lines[3], "0.5,0.0,true");
    let artifacts = &report(&r)["artifacts"];
    assert!(artifacts[0].as_str().unwrap().ends_with("rd_curve.csv"));
}

#[test]
fn selftest_passes() {
    let out = run(&["selftest"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let r = report(&out);
    assert!(r["verdicts"].as_array().unwrap().iter().all(|v| v["pass"] == true));
}
