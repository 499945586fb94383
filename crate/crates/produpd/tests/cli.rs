use std::path::Path;

use produpd::cli::{run_with, ExitStatus};
use serde_json::Value;
use tempfile::TempDir;

fn run(args: &[&str]) -> (ExitStatus, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let argv = std::iter::once("produpd").chain(args.iter().copied());
    let status = run_with(argv, &mut out, &mut err);
    (status, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn write(dir: &TempDir, name: &str, body: &str) -> String {
    let path = dir.path().join(name);
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

fn fixtures() -> (TempDir, String, String, String) {
    let dir = TempDir::new().unwrap();
    let one = write(&dir, "one_world.json", r#"{"worlds":["w0"],"rel":[],"val":{"p":["w0"]}}"#);
    let two = write(
        &dir,
        "m.json",
        r#"{"worlds":["w0","w1"],"rel":[["w0","w1"],["w1","w1"]],"val":{"p":["w0"],"q":["w0","w1"]}}"#,
    );
    let events = write(
        &dir,
        "e.json",
        r#"{"events":["a0","a1"],"rel":[["a0","a1"],["a1","a1"]],"pre":{"a0":"q","a1":"true"}}"#,
    );
    (dir, one, two, events)
}

#[test]
fn universal_modality_on_one_world() {
    let (_d, one, _, _) = fixtures();
    let (status, out, _) = run(&["eval", "--model", &one, "--formula", "U p", "--world", "w0"]);
    assert_eq!(status, ExitStatus::Success);
    assert_eq!(out, "true\n");
}

#[test]
fn eval_prints_extension_and_json() {
    let (_d, _, two, _) = fixtures();
    let (status, out, _) = run(&["eval", "--model", &two, "--formula", "<> q"]);
    assert_eq!(status, ExitStatus::Success);
    assert_eq!(out, "{w0, w1}\n");
    let (_, out, _) = run(&["--json", "eval", "--model", &two, "--formula", "p"]);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["extension"], serde_json::json!(["w0"]));
}

#[test]
fn eval_with_events() {
    let (_d, _, two, events) = fixtures();
    let (status, out, _) = run(&["eval", "--model", &two, "--events", &events, "--formula", "<a0> <> j1"]);
    assert_eq!(status, ExitStatus::Success);
    assert_eq!(out, "{w0, w1}\n");
}

#[test]
fn nominal_outside_product_is_a_semantic_error() {
    let (_d, _, two, _) = fixtures();
    let (status, out, err) = run(&["eval", "--formula", "j0", "--model", &two, "--world", "w0"]);
    assert_eq!(status, ExitStatus::Failure);
    assert!(out.is_empty());
    assert!(err.contains("nominal"), "{err}");
}

#[test]
fn translate_matches_transcript() {
    let (_d, _, _, events) = fixtures();
    let (status, out, err) = run(&["translate", "--events", &events, "--event", "a0", "--formula", "exists p. p"]);
    assert_eq!(status, ExitStatus::Success, "{err}");
    assert_eq!(
        out.trim(),
        "exists _f0. exists _f1. ((U (_f0 -> q) & U (_f1 -> true)) & (((q & _f0) & q) | ((q & _f1) & false)))"
    );
    assert!(err.contains("sanity check passed"));

    let (status, out, _) =
        run(&["--json", "translate", "--events", &events, "--event", "a0", "--formula", "exists p. p", "--simplify"]);
    assert_eq!(status, ExitStatus::Success);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["sanity_check"]["passed"], true);
    assert_eq!(v["simplified"], true);
    assert_eq!(v["input_eps"], 1);
    assert!(!v["steps"].as_array().unwrap().is_empty());
}

#[test]
fn formula_from_file() {
    let (dir, one, _, _) = fixtures();
    let f = write(&dir, "f.txt", "[] false\n");
    let (status, out, _) = run(&["eval", "--model", &one, "--formula", &format!("@{f}"), "--world", "w0"]);
    assert_eq!(status, ExitStatus::Success);
    assert_eq!(out, "true\n");
}

#[test]
fn parse_normalises() {
    let (status, out, _) = run(&["parse", "p&q|~r"]);
    assert_eq!(status, ExitStatus::Success);
    assert_eq!(out, "((p & q) | ~r)\n");
    let (_, out, _) = run(&["--json", "parse", "exists p. <a0> p"]);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["eps"], 1);
}

#[test]
fn product_and_announce() {
    let (_d, _, two, events) = fixtures();
    let (status, out, _) = run(&["product", "--model", &two, "--events", &events]);
    assert_eq!(status, ExitStatus::Success);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["worlds"].as_array().unwrap().len(), 4);
    assert_eq!(v["tags"].as_object().unwrap().len(), 4);

    let (status, out, _) = run(&["announce", "--model", &two, "--formula", "~p"]);
    assert_eq!(status, ExitStatus::Success);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["worlds"], serde_json::json!(["w1"]));
}

#[test]
fn bisim_verdicts() {
    let dir = TempDir::new().unwrap();
    let l = write(&dir, "l.json", r#"{"worlds":["w"],"rel":[["w","w"]],"val":{"p":["w"]}}"#);
    let c = write(&dir, "c.json", r#"{"worlds":["u","v"],"rel":[["u","v"],["v","u"]],"val":{"p":["u","v"]}}"#);
    let (status, out, _) = run(&["bisim", "--model1", &l, "--world1", "w", "--model2", &c, "--world2", "v"]);
    assert_eq!(status, ExitStatus::Success);
    assert!(out.starts_with("bisimilar\n"));
    let (_, out, _) = run(&["--json", "bisim", "--model1", &l, "--world1", "w", "--model2", &c, "--world2", "u"]);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["bisimilar"], true);
    assert_eq!(v["pairs"].as_array().unwrap().len(), 2);
}

#[test]
fn fuzz_small_run() {
    let (status, out, _) = run(&["--json", "fuzz", "--cases", "5", "--seed", "7", "--suites", "translation,fixpoint"]);
    assert_eq!(status, ExitStatus::Success);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["passed"], true);
    assert_eq!(v["suites"].as_array().unwrap().len(), 2);
}

#[test]
fn usage_errors_exit_two() {
    let (_d, one, _, _) = fixtures();
    assert_eq!(run(&["eval", "--bogus"]).0, ExitStatus::Usage);
    assert_eq!(run(&["nosuch"]).0, ExitStatus::Usage);
    assert_eq!(run(&["eval", "--model", &one, "--formula", "p &"]).0, ExitStatus::Usage);
    assert_eq!(run(&["eval", "--model", "/nonexistent.json", "--formula", "p"]).0, ExitStatus::Usage);
    assert_eq!(run(&["eval", "--model", &one, "--formula", "p", "--world", "zz"]).0, ExitStatus::Usage);
    assert_eq!(run(&["fuzz", "--suites", "nope"]).0, ExitStatus::Usage);
    assert_eq!(run(&["fuzz", "--edge-probability", "3/2"]).0, ExitStatus::Usage);
    assert_eq!(run(&["fuzz", "--cases", "0"]).0, ExitStatus::Usage);
}

#[test]
fn binary_exit_codes() {
    let (_d, one, _, _) = fixtures();
    let bin = Path::new(env!("CARGO_BIN_EXE_produpd"));
    let status = std::process::Command::new(bin)
        .args(["eval", "--model", &one, "--formula", "j0"])
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(1));
    let status = std::process::Command::new(bin)
        .args(["eval", "--model", &one, "--formula", "E p", "--world", "w0"])
        .env("PRODUPD_BUDGET_WORLDS", "not-a-number")
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(2));
}
