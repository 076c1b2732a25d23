use std::path::PathBuf;
use std::process::Command;

use bnsentinel_cli::{run_cli, EXIT_ALERT, EXIT_IMPOSSIBLE, EXIT_INVALID, EXIT_OK};
use serde_json::Value;

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("data")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("bnsentinel").chain(args.iter().copied());
    let code = run_cli(argv, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn run_json(args: &[&str]) -> Value {
    let mut full = vec!["--format", "json"];
    full.extend_from_slice(args);
    let (code, out, err) = run(&full);
    assert_eq!(code, EXIT_OK, "stderr: {err}");
    serde_json::from_str(&out).unwrap()
}

fn write_temp(dir: &tempfile::TempDir, name: &str, text: &str) -> String {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn validate_reports_structure() {
    let v = run_json(&["validate", &data("disease.json")]);
    assert_eq!(v["valid"], true);
    assert_eq!(v["variables"], 5);
    assert_eq!(v["edges"], 4);
    assert_eq!(v["rebuttals"], 1);
    assert_eq!(v["topological_order"][0], "D");
}

#[test]
fn invalid_network_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write_temp(
        &dir,
        "bad.json",
        r#"{"variables": [{"name": "A", "outcomes": ["a", "b"]}],
            "nodes": [{"variable": "A", "cpt": [[0.7, 0.7]]}]}"#,
    );
    let (code, out, err) = run(&["validate", &bad]);
    assert_eq!(code, EXIT_INVALID);
    assert!(out.is_empty());
    assert!(err.contains("validation error"), "{err}");

    let (code, _, err) = run(&[
        "validate",
        &dir.path().join("missing.json").to_string_lossy(),
    ]);
    assert_eq!(code, EXIT_INVALID);
    assert!(err.contains("i/o error"));
}

#[test]
fn infer_without_evidence_gives_priors() {
    let v = run_json(&["infer", &data("disease.json"), "--query", "D,T"]);
    assert_eq!(v["evidence"].as_array().unwrap().len(), 0);
    assert_eq!(v["conflict_bits"], Value::Null);
    let posts = v["posteriors"].as_array().unwrap();
    assert_eq!(posts.len(), 2);
    assert_eq!(posts[0]["distribution"][0], 0.001);
    let t = posts[1]["distribution"][0].as_f64().unwrap();
    assert!((t - (0.001 * 0.99 + 0.999 * 0.01)).abs() < 1e-12);
}

#[test]
fn infer_with_evidence() {
    let v = run_json(&[
        "infer",
        &data("disease.json"),
        "--evidence",
        &data("disease_evidence.jsonl"),
    ]);
    let cj = v["conflict_bits"].as_f64().unwrap();
    assert!((cj - -0.3921).abs() < 1e-4);
    let p = v["evidence_probability"].as_f64().unwrap();
    assert!((p - (0.001 * 0.95 * 0.95 + 0.999 * 0.05 * 0.05)).abs() < 1e-12);
}

#[test]
fn monitor_final_state_equals_infer() {
    let dir = tempfile::tempdir().unwrap();
    let ev = write_temp(
        &dir,
        "ev.jsonl",
        "{\"variable\": \"S1\", \"outcome\": \"present\"}\n\
         {\"variable\": \"T\", \"outcome\": \"pos\"}\n\
         {\"variable\": \"S3\", \"outcome\": \"absent\"}\n",
    );
    let net = data("disease.json");
    let monitored = run_json(&["monitor", &net, "--evidence", &ev]);
    let inferred = run_json(&["infer", &net, "--evidence", &ev]);
    assert_eq!(monitored["final"], inferred);
    assert_eq!(monitored["steps"].as_array().unwrap().len(), 3);
    let last = &monitored["steps"][2];
    assert_eq!(last["conflict_bits"], inferred["conflict_bits"]);
    // Observing T makes the rebuttal on T informative.
    let lr = monitored["steps"][1]["rebuttals"][0]["likelihood_ratio"]
        .as_f64()
        .unwrap();
    assert!(lr != 1.0);
}

#[test]
fn monitor_alerts_on_conflict() {
    let net = data("sensor.json");
    let ev = data("sensor_disagree.jsonl");
    let (code, _, _) = run(&["monitor", &net, "--evidence", &ev]);
    assert_eq!(code, EXIT_OK);
    let (code, out, err) = run(&["monitor", &net, "--evidence", &ev, "--fail-on-alert"]);
    assert_eq!(code, EXIT_ALERT);
    assert!(out.contains("ALERT at item 2"), "{out}");
    assert!(err.contains("alert"));
    let (code, _, _) = run(&[
        "monitor",
        &net,
        "--evidence",
        &ev,
        "--fail-on-alert",
        "--conflict-bits",
        "5",
    ]);
    assert_eq!(code, EXIT_OK);
}

#[test]
fn rebuttal_alert_respects_odds_threshold() {
    let dir = tempfile::tempdir().unwrap();
    let ev = write_temp(
        &dir,
        "ev.jsonl",
        "{\"variable\": \"T\", \"outcome\": \"pos\"}\n",
    );
    let net = data("disease.json");
    let v = run_json(&[
        "monitor",
        &net,
        "--evidence",
        &ev,
        "--rebuttal-odds",
        "1e-6",
    ]);
    let alerts = v["alerts"].as_array().unwrap();
    assert!(alerts
        .iter()
        .any(|a| a["kind"] == "rebuttal" && a["subject"] == "T"));
}

#[test]
fn bad_thresholds_are_rejected() {
    let net = data("sensor.json");
    let ev = data("sensor_disagree.jsonl");
    for bad in ["0", "-1", "inf"] {
        let (code, _, err) = run(&["monitor", &net, "--evidence", &ev, "--conflict-bits", bad]);
        assert_eq!(code, EXIT_INVALID, "{bad}");
        assert!(!err.is_empty());
    }
}

#[test]
fn impossible_evidence_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let net = write_temp(
        &dir,
        "net.json",
        r#"{"variables": [{"name": "H", "outcomes": ["on", "off"]},
                          {"name": "A", "outcomes": ["on", "off"]}],
            "nodes": [{"variable": "H", "cpt": [[1.0, 0.0]]},
                      {"variable": "A", "parents": ["H"], "cpt": [[1.0, 0.0], [0.5, 0.5]]}]}"#,
    );
    let ev = write_temp(
        &dir,
        "ev.jsonl",
        "{\"variable\": \"A\", \"outcome\": \"off\"}\n",
    );
    for cmd in ["infer", "monitor"] {
        let (code, _, err) = run(&[cmd, &net, "--evidence", &ev]);
        assert_eq!(code, EXIT_IMPOSSIBLE, "{cmd}");
        assert!(err.contains("impossible evidence"));
    }
}

#[test]
fn malformed_evidence_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let ev = write_temp(&dir, "ev.jsonl", "{\"variable\": \"S1\"}\n");
    let (code, _, err) = run(&["infer", &data("disease.json"), "--evidence", &ev]);
    assert_eq!(code, EXIT_INVALID);
    assert!(err.contains("line 1"));
    let ev = write_temp(
        &dir,
        "ev2.jsonl",
        "{\"variable\": \"S9\", \"outcome\": \"present\"}\n",
    );
    let (code, _, _) = run(&["infer", &data("disease.json"), "--evidence", &ev]);
    assert_eq!(code, EXIT_INVALID);
}

#[test]
fn diagnose_prefers_the_test() {
    let v = run_json(&[
        "diagnose",
        &data("disease.json"),
        "--evidence",
        &data("disease_evidence.jsonl"),
        "--candidates",
        "D",
    ]);
    assert_eq!(v["explanations"][0]["variable"], "D");
    assert_eq!(v["explanations"][0]["outcome"], "present");
    assert_eq!(v["hypothesis"]["outcome"], "present");
    assert_eq!(v["discriminators"][0]["variable"], "T");
    let before = v["discriminators"][0]["conflict_before"].as_f64().unwrap();
    let after = v["discriminators"][0]["conflict_after"].as_f64().unwrap();
    assert!(after < before);
}

#[test]
fn verify_tail_bound_with_both_straws() {
    let net = data("disease.json");
    let v = run_json(&["verify-theorem1", &net, "--K", "1,2,4,8"]);
    assert_eq!(v["straw"], "independence-of-priors");
    assert_eq!(v["tails"].as_array().unwrap().len(), 4);
    assert_eq!(v["all_satisfied"], true);
    let v = run_json(&[
        "verify-theorem1",
        &net,
        "--straw",
        &data("disease_straw.json"),
        "--K",
        "1",
    ]);
    assert_eq!(v["straw"], "explicit-table");
    assert_eq!(v["scope"], serde_json::json!(["S1", "T"]));
    assert_eq!(v["all_satisfied"], true);
}

#[test]
fn reproduce_worked_example_text() {
    let (code, out, _) = run(&["reproduce-figure1"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("P(c_J > 0) = 0.55"), "{out}");
    assert!(out.contains("-0.0143"));
    assert!(out.contains("0.0289"));
    assert!(out.contains("not the printed -0.0413"));
}

#[test]
fn json_output_is_reproducible() {
    let args = ["--format", "json", "reproduce-figure1"];
    assert_eq!(run(&args).1, run(&args).1);
    let net = data("disease.json");
    let args = [
        "--format", "json", "--seed", "5", "sample", &net, "-n", "20",
    ];
    let (code, first, _) = run(&args);
    assert_eq!(code, EXIT_OK);
    assert_eq!(first, run(&args).1);
    assert_eq!(first.lines().count(), 20);
    let other = run(&["--seed", "6", "sample", &net, "-n", "20"]).1;
    assert_ne!(first, other);
}

#[test]
fn help_and_usage_errors() {
    let (code, out, _) = run(&["--help"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("monitor"));
    let (code, _, err) = run(&["frobnicate"]);
    assert_eq!(code, EXIT_INVALID);
    assert!(!err.is_empty());
    let (code, _, _) = run(&[
        "diagnose",
        &data("disease.json"),
        "--evidence",
        &data("disease_evidence.jsonl"),
    ]);
    assert_eq!(code, EXIT_INVALID);
}

#[test]
fn binary_exit_codes_and_seed_env() {
    let bin = env!("CARGO_BIN_EXE_bnsentinel");
    let status = Command::new(bin)
        .args([
            "monitor",
            &data("sensor.json"),
            "--evidence",
            &data("sensor_disagree.jsonl"),
            "--fail-on-alert",
        ])
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(EXIT_ALERT));

    let sample = |env_seed: &str| {
        Command::new(bin)
            .env("BNSENTINEL_SEED", env_seed)
            .args(["sample", &data("sensor.json"), "-n", "10"])
            .output()
            .unwrap()
            .stdout
    };
    let flag = Command::new(bin)
        .args(["--seed", "42", "sample", &data("sensor.json"), "-n", "10"])
        .output()
        .unwrap()
        .stdout;
    assert_eq!(sample("42"), flag);
    assert_ne!(sample("43"), flag);
}
