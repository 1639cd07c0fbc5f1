mod common;

use std::process::Command;

fn evsumm() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_evsumm"));
    c.env("RUST_LOG", "error");
    c
}

#[test]
fn rank_prints_a_table() {
    let out = evsumm()
        .args(["rank", "--graph"])
        .arg(common::data_dir().join("running_example/graph.json"))
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 14);
    assert!(text.contains("0.1155"));
}

#[test]
fn preprocess_writes_kept_pairs() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("kept.jsonl");
    let out = evsumm()
        .args(["preprocess", "--pairs"])
        .arg(common::data_dir().join("toy/pairs.jsonl"))
        .arg("--out")
        .arg(&out_path)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let kept = std::fs::read_to_string(&out_path).unwrap().lines().count();
    assert!(kept > 0);
    assert_eq!(report["summary"]["kept"], kept);
}

#[test]
fn evaluate_reports_both_meteor_modes() {
    let dir = tempfile::tempdir().unwrap();
    let c = dir.path().join("c.jsonl");
    std::fs::write(&c, "{\"id\": \"1\", \"text\": \"Sends a message to the service.\"}\n").unwrap();
    let out = evsumm()
        .args(["evaluate", "--candidates"])
        .arg(&c)
        .arg("--references")
        .arg(&c)
        .args(["--meteor-mode", "standard"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["bleu4"], 1.0);
    assert!(report["meteor_alt"].is_number());
}

#[test]
fn bad_arguments_fail() {
    let out = evsumm()
        .args(["rank", "--graph", "/nonexistent/graph.json"])
        .output()
        .unwrap();
    assert!(!out.status.success());
    let out = evsumm()
        .args(["evaluate", "--candidates", "a", "--references", "b", "--meteor-mode", "fuzzy"])
        .output()
        .unwrap();
    assert!(!out.status.success());
}
