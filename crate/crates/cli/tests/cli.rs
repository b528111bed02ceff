use std::process::{Command, Output};

use serde_json::Value;

fn opcover(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_opcover")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is a JSON report")
}

fn write(dir: &tempfile::TempDir, name: &str, text: &str) -> String {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

const T2: &str = r#"{
    "name": "t2",
    "algebras": [{"name": "T2", "ambient": [2], "generators": [
        {"name": "E11", "matrix": [[1, 0], [0, 0]]},
        {"name": "E22", "matrix": [[0, 0], [0, 1]]},
        {"name": "E12", "matrix": [[0, 1], [0, 0]]}]}],
    "covers": [{"name": "id", "algebra": "T2", "identity": true}],
    "checks": [
        {"id": "dims", "op": "structure", "cover": "id", "expect": {"cover": {"dim": 4}}},
        {"id": "wrong", "op": "structure", "cover": "id", "expect": {"cover": {"dim": 5}}}
    ]
}"#;

#[test]
fn list_names_bundled_scenarios() {
    let out = opcover(&["list"]);
    assert!(out.status.success());
    let names = String::from_utf8(out.stdout).unwrap();
    for n in ["a4_schur", "a4_crossed", "a4_partial", "t2_covers", "t2_trivialize"] {
        assert!(names.lines().any(|l| l == n), "{n} missing");
    }
}

#[test]
fn failing_expectation_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(&dir, "t2.json", T2);
    let out = opcover(&["run", &path]);
    assert_eq!(out.status.code(), Some(1));
    let rep = json(&out);
    assert_eq!(rep["status"], "fail");
    assert_eq!(rep["verdicts"].as_array().unwrap().len(), 2);
    assert_eq!(rep["verdicts"][0]["status"], "pass");
    assert_eq!(rep["verdicts"][1]["status"], "fail");
}

#[test]
fn subcommand_with_explicit_cover_runs_one_check() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(&dir, "t2.json", T2);
    let out = opcover(&["structure", &path, "--cover", "id", "--format", "text"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("structure"));
    assert!(text.contains("status: Pass"));
}

#[test]
fn empty_scenario_passes() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(&dir, "e.json", r#"{"name": "empty"}"#);
    let out = opcover(&["run", &path]);
    assert_eq!(out.status.code(), Some(0));
    assert!(json(&out)["results"].as_array().unwrap().is_empty());
}

#[test]
fn input_errors_exit_three() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(&dir, "b.json", r#"{"name": "x", "bogus": 1}"#);
    assert_eq!(opcover(&["run", &bad]).status.code(), Some(3));
    let unresolved = write(
        &dir,
        "u.json",
        r#"{"name": "x", "checks": [{"op": "structure", "cover": "nope"}]}"#,
    );
    assert_eq!(opcover(&["run", &unresolved]).status.code(), Some(3));
    assert_eq!(opcover(&["run", "/definitely/not/here.json"]).status.code(), Some(3));
    assert_eq!(opcover(&["frobnicate"]).status.code(), Some(3));
}

#[test]
fn starved_solver_is_inconclusive() {
    let out = opcover(&["check-cover", "builtin:a4_schur", "--max-iter", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["status"], "inconclusive");
}

#[test]
fn admissible_reports_witness() {
    let out = opcover(&["admissible", "builtin:a4_schur", "--cover", "schur", "--system", "swap"]);
    let rep = json(&out);
    assert_eq!(rep["results"][0]["details"]["verdict"], "NotAdmissible");
    assert_eq!(rep["results"][0]["details"]["element"], 1);
    assert_eq!(rep["hashes"][0]["hash"].as_str().unwrap().len(), 64);
}

#[test]
fn crossed_reports_dimensions() {
    let out = opcover(&["crossed", "builtin:a4_crossed"]);
    assert_eq!(out.status.code(), Some(0));
    let d = &json(&out)["results"][0]["details"];
    assert_eq!(d["crossed"]["dim"], 16);
    assert_eq!(d["against"]["dim"], 16);
    assert_eq!(d["against"]["diagonal"]["dim"], 8);
}

#[test]
fn seed_flag_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(&dir, "e.json", r#"{"name": "empty", "seed": 5}"#);
    assert_eq!(json(&opcover(&["run", &path]))["seed"], 5);
    assert_eq!(json(&opcover(&["run", &path, "--seed", "9"]))["seed"], 9);
}
