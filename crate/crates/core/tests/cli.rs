use std::path::Path;
use std::process::{Command, Output};

fn klcast(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_klcast"))
        .args(args)
        .output()
        .expect("spawn klcast")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn scenario(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("scenarios")
        .join(name)
        .display()
        .to_string()
}

#[test]
fn assumptions_pass_and_fail() {
    let ok = klcast(&["check-assumptions", "--n", "20", "--tb", "2", "--tm", "1", "--algo", "bracha"]);
    assert_eq!(code(&ok), 0, "{}", String::from_utf8_lossy(&ok.stdout));
    let bad = klcast(&["check-assumptions", "--n", "10", "--tb", "3", "--tm", "2", "--algo", "bracha"]);
    assert_eq!(code(&bad), 1);
    assert!(String::from_utf8_lossy(&bad.stdout).contains("FAIL"));
}

#[test]
fn guarantees_print_the_object_values() {
    let out = klcast(&["guarantees", "--n", "30", "--tb", "3", "--tm", "1", "--algo", "imbs-raynal"]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(code(&out), 0, "{text}");
    assert!(text.contains("l_MBRB=22"), "{text}");
    let sf = klcast(&["guarantees", "--n", "20", "--tb", "2", "--tm", "1", "--qd", "12", "--qf", "3"]);
    assert_eq!(code(&sf), 0);
    assert!(String::from_utf8_lossy(&sf.stdout).starts_with("k'="));
}

#[test]
fn malformed_parameters_are_config_errors() {
    let out = klcast(&["guarantees", "--n", "4", "--tb", "3", "--tm", "0", "--c", "9", "--algo", "bracha"]);
    assert_eq!(code(&out), 2);
    let out = klcast(&["check-assumptions", "--n", "4", "--tb", "0", "--tm", "0"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn simulate_writes_a_trace() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("run.jsonl");
    let out = klcast(&[
        "simulate",
        "--scenario",
        &scenario("bracha_n8_equivocator.json"),
        "--trace",
        trace.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
    let text = std::fs::read_to_string(&trace).unwrap();
    assert!(text.lines().count() > 10);
}

#[test]
fn missing_or_invalid_scenarios_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.json");
    assert_eq!(code(&klcast(&["simulate", "--scenario", missing.to_str().unwrap()])), 2);
    let bad = dir.path().join("bad.json");
    std::fs::write(
        &bad,
        r#"{"n":4,"t_b":1,"t_m":0,"algorithm":"bracha","byzantine":[{"id":2,"behavior":"silent"},{"id":3,"behavior":"silent"}]}"#,
    )
    .unwrap();
    assert_eq!(code(&klcast(&["battery", "--scenario", bad.to_str().unwrap()])), 2);
}

#[test]
fn battery_and_oracle() {
    let out = klcast(&["battery", "--scenario", &scenario("ir_n11_spammer.json"), "--seeds", "20"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
    let out = klcast(&["oracle", "--scenario", &scenario("oracle_sf_n4.json"), "--max-branches", "5"]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stdout).contains("overflow"));
}

#[test]
fn sweep_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("grid.csv");
    let out = klcast(&[
        "sweep", "--n", "13", "--algo", "bracha", "--tb-max", "4", "--tm-max", "3", "--out",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 1 + 5 * 4);
}
