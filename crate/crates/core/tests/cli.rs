mod common;

use std::io::Write;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

use common::{corpus_path, fixtures, RUNNING_EXAMPLE};

fn eoqa(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_eoqa")).args(args).output().unwrap()
}

fn kg() -> String {
    fixtures().display().to_string()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

#[test]
fn ask_prints_answers() {
    let out = eoqa(&["ask", "--kg", &kg(), "--question", RUNNING_EXAMPLE]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["question"], RUNNING_EXAMPLE);
    assert_eq!(v["answers"]["rows"].as_array().unwrap().len(), 2);
    assert!(v["trace"].is_null());
    assert!(v["timings"]["total"].as_f64().unwrap() > 0.0);
}

#[test]
fn empty_question_exits_with_code_two() {
    let out = eoqa(&["ask", "--kg", &kg(), "--question", "  "]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["error"], "question is empty");
}

#[test]
fn missing_question_exits_with_code_two() {
    let out = eoqa(&["ask", "--kg", &kg()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(json(&out)["error"].is_string());
}

#[test]
fn missing_kg_exits_with_code_two() {
    let out = eoqa(&["ask", "--kg", "/nonexistent/kg", "--question", "Which rivers are in Italy?"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(json(&out)["error"].as_str().unwrap().contains("/nonexistent/kg"));
}

#[test]
fn no_execute_leaves_answers_null() {
    let out = eoqa(&["ask", "--kg", &kg(), "--question", RUNNING_EXAMPLE, "--no-execute", "--trace"]);
    assert!(out.status.success());
    let v = json(&out);
    assert!(v["answers"].is_null());
    assert!(v["trace"]["conllu"].as_str().unwrap().contains("\tShow\t"));
}

#[test]
fn emit_sparql_prints_only_the_query() {
    let out = eoqa(&["ask", "--kg", &kg(), "--question", "Which rivers are in Italy?", "--emit-sparql"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("SELECT"));
    eoqa::sparql::parse(&text).unwrap();
}

#[test]
fn question_can_come_from_stdin() {
    let mut child = Command::new(env!("CARGO_BIN_EXE_eoqa"))
        .args(["ask", "--kg", &kg(), "--stdin"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(b"Is there a lake in Greece?\n").unwrap();
    let out = child.wait_with_output().unwrap();
    assert!(out.status.success());
    assert_eq!(json(&out)["answers"]["boolean"], true);
}

#[test]
fn materialize_is_idempotent_and_feeds_ask() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.nt");
    let b = dir.path().join("b.nt");
    for path in [&a, &b] {
        let out = eoqa(&["materialize", "--kg", &kg(), "-o", path.to_str().unwrap()]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let (ta, tb) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert!(!ta.is_empty());
    assert_eq!(ta, tb);

    let pre = eoqa(&["ask", "--kg", &kg(), "--materialized", a.to_str().unwrap(), "--question", RUNNING_EXAMPLE]);
    let live = eoqa(&["ask", "--kg", &kg(), "--question", RUNNING_EXAMPLE]);
    assert_eq!(json(&pre)["answers"], json(&live)["answers"]);
}

#[test]
fn materialize_subset_of_predicates() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("within.nt");
    let out = eoqa(&["materialize", "--kg", &kg(), "-o", out_path.to_str().unwrap(), "--predicates", "within"]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&out_path).unwrap();
    assert!(text.lines().all(|l| l.contains("#sfWithin>")));
    let bad = eoqa(&["materialize", "--kg", &kg(), "-o", out_path.to_str().unwrap(), "--predicates", "touches"]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn empty_kg_materializes_to_empty_file() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("out.nt");
    let out = eoqa(&["materialize", "--kg", dir.path().to_str().unwrap(), "-o", out_path.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(std::fs::read_to_string(&out_path).unwrap(), "");
}

#[test]
fn materialized_file_without_relations_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.nt");
    std::fs::write(&empty, "").unwrap();
    let out = eoqa(&["ask", "--kg", &kg(), "--materialized", empty.to_str().unwrap(), "--question", "Which rivers are in Italy?"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unwritable_output_fails() {
    let out = eoqa(&["materialize", "--kg", &kg(), "-o", "/nonexistent/dir/out.nt"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/nonexistent/dir/out.nt"));
}

#[test]
fn eval_prints_table_and_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    let out = eoqa(&[
        "eval",
        "--kg",
        &kg(),
        "--corpus",
        corpus_path().to_str().unwrap(),
        "--report",
        report.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let table = String::from_utf8(out.stdout).unwrap();
    assert!(table.starts_with("Category"));
    assert!(table.lines().any(|l| l.starts_with("ALL")));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v["categories"].as_array().unwrap().len(), 9);
    assert!(v["overall"]["accuracy"].as_f64().unwrap() >= 0.9);
}
