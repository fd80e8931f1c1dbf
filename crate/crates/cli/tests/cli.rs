use std::process::{Command, Output};

use serde_json::Value;

fn amen(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_amen")).args(args).env_remove("AMEN_WINDOW_CAP").env_remove("AMEN_SEARCH_BUDGET").output().unwrap()
}

fn json(args: &[&str]) -> Value {
    let out = amen(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn density_evens() {
    let v = json(&["density", "--set", "evens"]);
    assert_eq!((v["verdict"].as_str(), v["value"].as_str()), (Some("success"), Some("1/2")));
    let v = json(&["density", "--set", "runs", "--family", "sym", "--n-range", "4:6", "--direction", "lower"]);
    assert_eq!(v["value"], "0/1");
}

#[test]
fn counterexample_report() {
    let v = json(&["counterexample", "--M", "1", "--N", "1", "--L", "4", "--k", "3"]);
    assert_eq!(v["density_a"], "1/4");
    assert_eq!(v["density_b"], "1/4");
    assert_eq!(v["thickness"]["thick"], false);
    assert!(v["observed_gap"].as_u64().unwrap() > 0);
}

#[test]
fn jin_parity() {
    let v = json(&["thm", "jin", "--A", "evens", "--B", "evens"]);
    assert_eq!(v["k_bound"], 4);
    assert_eq!(v["verdict"], "success");
}

#[test]
fn schema_errors_are_machine_readable() {
    let out = amen(&["density", "--set", "nonsense"]);
    assert_eq!(out.status.code(), Some(2));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "schema");
    let out = amen(&["density", "--set", "evens", "--n-range", "5:2"]);
    assert_eq!(out.status.code(), Some(2));
    let out = amen(&["thm", "jin", "--A", "evens", "--B", "evens", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn csv_tables() {
    let out = amen(&["folner-check", "--format", "csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let rows: Vec<csv::StringRecord> = r.records().map(|x| x.unwrap()).collect();
    assert_eq!(rows.len(), 4);
    assert_eq!(&rows[3][2], "2/65");
    let out = amen(&["delta", "--set", "evens", "--epsilon", "1/4", "--candidates", "interval:-3:4", "--format", "csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 1 + 3);
}

#[test]
fn budget_exhaustion_is_inconclusive() {
    let out = amen(&["syndetic", "--set", "mod:7:0", "--k", "6", "--region", "interval:0:70", "--pool", "interval:0:30", "--search-budget", "3"]);
    assert!(out.status.success());
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["verdict"], "inconclusive");
    assert_eq!(v["budgets"]["search_budget"], 3);
}

#[test]
fn env_overrides_budgets() {
    let out = Command::new(env!("CARGO_BIN_EXE_amen"))
        .args(["density", "--set", "evens"])
        .env("AMEN_WINDOW_CAP", "5")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "window_cap");
}

#[test]
fn output_file_run_config_and_verify() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    let out = dir.path().join("cert.json");
    let cfg_text = r#"{"sets":{"A":"mod:2:0","B":"mod:3:0"},"operation":{"op":"thm-delta-cover","sets":["A","B"],"epsilon":"0","p":{"interval":[0,12]},"params":{"e":{"interval":[0,360]}}}}"#;
    std::fs::write(&cfg, cfg_text).unwrap();
    let run = amen(&["run", "--config", cfg.to_str().unwrap(), "--output", out.to_str().unwrap()]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    assert!(run.stdout.is_empty());
    let first = std::fs::read(&out).unwrap();
    let v: Value = serde_json::from_slice(&first).unwrap();
    assert_eq!(v["r"], 6);
    assert_eq!(v["l"].as_array().unwrap().len(), 6);
    let again = amen(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(again.stdout, first);
    let ver = json(&["verify", out.to_str().unwrap()]);
    assert_eq!(ver["ok"], true);
    let mut bad = v.clone();
    bad["r"] = 7.into();
    std::fs::write(&out, bad.to_string()).unwrap();
    assert_eq!(amen(&["verify", out.to_str().unwrap()]).status.code(), Some(1));
    std::fs::write(&out, "not json").unwrap();
    assert_eq!(amen(&["verify", out.to_str().unwrap()]).status.code(), Some(2));
}
