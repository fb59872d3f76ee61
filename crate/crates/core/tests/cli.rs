use std::io::Write;
use std::process::{Command, Stdio};

use serde_json::{json, Value};
use tsirelson::constructions::ConstructionTrace;
use tsirelson::norm::NormResult;

fn run(args: &[&str], stdin: &str) -> (i32, Value) {
    let mut child = Command::new(env!("CARGO_BIN_EXE_tsirelson"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(stdin.as_bytes()).unwrap();
    let out = child.wait_with_output().unwrap();
    let text = String::from_utf8(out.stdout).unwrap();
    let value = if text.trim().is_empty() { Value::Null } else { serde_json::from_str(&text).unwrap() };
    (out.status.code().unwrap(), value)
}

fn error_kind(v: &Value) -> &str {
    v["error"]["kind"].as_str().unwrap()
}

#[test]
fn family_membership() {
    let (code, v) = run(&["family"], r#"{"F":[3,4,5],"family":{"kind":"S","index":1}}"#);
    assert_eq!(code, 0);
    assert_eq!(v, json!({"member": true}));
    let (_, v) = run(&["family"], r#"{"F":[2,3,4],"family":{"kind":"S","index":1}}"#);
    assert_eq!(v, json!({"member": false}));
}

#[test]
fn norm_of_a_schreier_block() {
    let (code, v) = run(&["norm"], r#"{"x":{"coords":{"4":"1","5":"1","6":"1","7":"1"}}}"#);
    assert_eq!(code, 0);
    assert_eq!(v["value"], "2/1");
    assert_eq!(v["method"], "dp-schreier");
    let back: NormResult = serde_json::from_value(v.clone()).unwrap();
    assert_eq!(serde_json::to_value(&back).unwrap(), v);
}

#[test]
fn inline_spec_overrides_the_default() {
    let payload = json!({
        "x": {"coords": {"1": "1", "2": "1", "3": "1"}},
        "spec": serde_json::to_value(tsirelson::parameters::SpaceSpec::a3_toy()).unwrap(),
    });
    let (code, v) = run(&["norm"], &payload.to_string());
    assert_eq!(code, 0);
    assert_eq!(v["value"], "3/2");
}

#[test]
fn spec_file_flag() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("spec.json");
    std::fs::write(&path, serde_json::to_string(&tsirelson::parameters::SpaceSpec::a3_toy()).unwrap()).unwrap();
    let (_, v) = run(&["norm", "--spec", path.to_str().unwrap()], r#"{"x":{"coords":{"1":"1","2":"1","3":"1"}}}"#);
    assert_eq!(v["value"], "3/2");
}

#[test]
fn f4_hypothesis_violation_exits_zero() {
    let payload =
        r#"{"x":{"blocks":[{"coords":{"5":"1"}}],"coeffs":["1/1"],"jseq":[4],"C":"30"},"j":2,"f":{"leaf":5,"sign":1}}"#;
    let (code, v) = run(&["lemma", "--kind", "f4"], payload);
    assert_eq!(code, 0);
    assert_eq!(v["verdict"], "hypothesis-not-met");
}

#[test]
fn failed_verdict_exits_one() {
    let payload = r#"{"x":{"coords":{"4":"1/4","5":"1/4","6":"1/4","7":"1/4"}},"n":1,"eps":"1/4"}"#;
    let (code, v) = run(&["scc"], payload);
    assert_eq!(code, 1);
    assert_eq!(v["check"]["passed"], false);
    assert_eq!(v["check"]["certificate"]["smallness"], "1/4");
    let (code, _) = run(&["scc"], &payload.replace(r#""eps":"1/4""#, r#""eps":"1/3""#));
    assert_eq!(code, 0);
}

#[test]
fn repeated_average_from_a_stream() {
    let (code, v) = run(&["scc"], r#"{"L":{"start":4,"step":1},"n":1}"#);
    assert_eq!(code, 0);
    assert_eq!(v["x"], json!({"coords": {"4": "1/4", "5": "1/4", "6": "1/4", "7": "1/4"}}));
}

#[test]
fn usage_and_parse_errors_exit_two() {
    let (code, v) = run(&["no-such-command"], "{}");
    assert_eq!((code, error_kind(&v)), (2, "usage"));
    let (code, v) = run(&["family"], "{not json");
    assert_eq!((code, error_kind(&v)), (2, "parse"));
    let (code, v) = run(&["family"], r#"{"F":[3],"family":{"kind":"S","index":1},"extra":1}"#);
    assert_eq!((code, error_kind(&v)), (2, "parse"));
    let (code, v) = run(&["family"], r#"{"F":[4,3],"family":{"kind":"S","index":1}}"#);
    assert_eq!(code, 2);
    assert!(v["error"]["message"].is_string());
}

#[test]
fn unknown_suite_exits_two() {
    let (code, v) = run(&["verify", "nope"], "");
    assert_eq!((code, error_kind(&v)), (2, "not-found"));
}

#[test]
fn missing_sigma_table_is_an_error() {
    let (code, _) = run(&["sigma", "--sigma-table", "/nonexistent/table.json"], r#"{"sequences":[]}"#);
    assert_eq!(code, 2);
}

#[test]
fn g_op_and_eval() {
    let (code, v) = run(
        &["eval"],
        r#"{"f":{"w":"1/2","op":"block","children":[{"leaf":2,"sign":1},{"leaf":3,"sign":-1}]},"x":{"coords":{"2":"3","3":"1"}}}"#,
    );
    assert_eq!(code, 0);
    assert_eq!(v["value"], "1/1");
    let (code, v) = run(&["g-op"], r#"{"f":{"coords":{"1":"1","5":"1"}},"F":[2]}"#);
    assert_eq!(code, 2, "{v}");
}

#[test]
fn pair_trace_through_a_frozen_table() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("sigma.json");
    let (_, v) = run(&["sigma"], r#"{"sequences":[[[1,2]]]}"#);
    std::fs::write(&table, v["table"].to_string()).unwrap();
    let units =
        |off: u64| -> Vec<Value> { (1..=8).map(|k| json!({"coords": {(3 * k + off).to_string(): "1"}})).collect() };
    let payload = json!({"blocksY": units(0), "blocksZ": units(1), "j": 0}).to_string();
    let out = dir.path().join("trace.json");
    let args = ["build-pair", "--sigma-table", table.to_str().unwrap(), "--out", out.to_str().unwrap()];
    let (code, v) = run(&args, &payload);
    assert_eq!((code, v), (0, Value::Null));
    let trace: ConstructionTrace = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert!(trace.passed);
    let frozen: tsirelson::functionals::CodingTable =
        serde_json::from_str(&std::fs::read_to_string(&table).unwrap()).unwrap();
    assert!(trace.table.entries.starts_with(&frozen.entries));
    assert!(trace.table.entries.len() > frozen.entries.len());
}
