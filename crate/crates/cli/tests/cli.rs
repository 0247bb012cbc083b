use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use newsvendor_cli::scenario::ScenarioFile;
use tempfile::TempDir;

const MISMATCH: &str = r#"{
  "market": {"p": 2.0, "w": 1.0},
  "estimated_demand": {"family": "uniform", "lo": 0.0, "hi": 1.0},
  "parameter_uncertainties": [{"param": "hi", "dist": {"family": "empirical", "values": [1.2]}}],
  "order_family": {"family": "uniform", "bounds": [[0.4, 0.8], [0.4, 0.8]]},
  "search": {"method": "grid", "budget": 400, "seed": 0},
  "sim": {"n_draws": 200000, "seed": 3}
}"#;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_newsvendor"))
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn solve_benchmark() {
    let dir = TempDir::new().unwrap();
    let text = MISMATCH.replace(r#"[{"param": "hi", "dist": {"family": "empirical", "values": [1.2]}}]"#, "[]");
    let sc = write(dir.path(), "s.json", &text);
    let json = dir.path().join("r.json");
    let o = run(&["solve", sc.to_str().unwrap(), "--json", json.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("Q̂* = 0.5"));
    assert!(out.contains("π* = 0.25"));
    assert!(out.contains("true       = estimated"));
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(json).unwrap()).unwrap();
    assert_eq!(report["true_demand"], "= estimated");
    assert_eq!(report["q_hat_star"], 0.5);
}

#[test]
fn missing_file_exits_2() {
    let o = run(&["solve", "/nonexistent/scenario.json"]);
    assert_eq!(code(&o), 2);
    let dir = TempDir::new().unwrap();
    let text = MISMATCH.replace(r#""values": [1.2]"#, r#""path": "missing.csv""#);
    let sc = write(dir.path(), "s.json", &text);
    assert_eq!(code(&run(&["solve", sc.to_str().unwrap()])), 2);
}

#[test]
fn schema_and_config_errors_exit_3() {
    let dir = TempDir::new().unwrap();
    let sc = write(dir.path(), "a.json", &MISMATCH.replace(r#""w": 1.0"#, r#""w": 2.5"#));
    let o = run(&["solve", sc.to_str().unwrap()]);
    assert_eq!(code(&o), 3);
    assert!(stderr(&o).contains("market.w"), "{}", stderr(&o));

    let sc = write(dir.path(), "b.json", &MISMATCH.replace(r#""budget": 400"#, r#""budget": 0"#));
    assert_eq!(code(&run(&["search", sc.to_str().unwrap()])), 3);

    let sc = write(dir.path(), "c.json", &MISMATCH.replace(r#""lo": 0.0, "hi": 1.0"#, r#""lo": 0.0, "hi": "x""#));
    let o = run(&["solve", sc.to_str().unwrap()]);
    assert_eq!(code(&o), 3);
    assert!(stderr(&o).contains("estimated_demand"), "{}", stderr(&o));

    let sc = write(dir.path(), "d.json", "{ not json");
    assert_eq!(code(&run(&["solve", sc.to_str().unwrap()])), 3);
}

#[test]
fn search_writes_one_trace_row_per_candidate() {
    let dir = TempDir::new().unwrap();
    let sc = write(dir.path(), "s.json", MISMATCH);
    let trace = dir.path().join("t.csv");
    let json = dir.path().join("r.json");
    let o = run(&[
        "search",
        sc.to_str().unwrap(),
        "--trace",
        trace.to_str().unwrap(),
        "--json",
        json.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let csv = std::fs::read_to_string(trace).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "candidate_id,param_1,param_2,expected_profit,margin,feasible");
    assert_eq!(lines.count(), 400);
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(json).unwrap()).unwrap();
    assert!(report["improvement"].as_f64().unwrap() > 0.0);
    assert_eq!(report["best_policy"]["kind"], "stochastic");
}

#[test]
fn search_without_estimation_error_keeps_q_hat() {
    let dir = TempDir::new().unwrap();
    let text = MISMATCH.replace(r#"[{"param": "hi", "dist": {"family": "empirical", "values": [1.2]}}]"#, "[]");
    let sc = write(dir.path(), "s.json", &text);
    let json = dir.path().join("r.json");
    let o = run(&["search", sc.to_str().unwrap(), "--json", json.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("deterministic optimum retained"));
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(json).unwrap()).unwrap();
    assert_eq!(report["best_policy"]["kind"], "deterministic");
    assert_eq!(report["improvement"], 0.0);
}

#[test]
fn rhs_mode_flag_overrides_scenario() {
    let dir = TempDir::new().unwrap();
    let sc = write(dir.path(), "s.json", MISMATCH);
    let json = dir.path().join("r.json");
    let o = run(&["search", sc.to_str().unwrap(), "--rhs-mode", "theorem", "--json", json.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(json).unwrap()).unwrap();
    assert_eq!(report["rhs_mode"], "theorem");
    assert!((report["baseline_profit"].as_f64().unwrap() - 0.25 / 1.2).abs() < 1e-12);
    assert_eq!(code(&run(&["search", sc.to_str().unwrap(), "--rhs-mode", "other"])), 3);
}

#[test]
fn validate_exit_codes() {
    let dir = TempDir::new().unwrap();
    let sc = write(dir.path(), "s.json", MISMATCH);
    let o = run(&["validate", sc.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}{}", stdout(&o), stderr(&o));
    let o = run(&["validate", sc.to_str().unwrap(), "--inject-bias", "0.1"]);
    assert_eq!(code(&o), 5);
    assert!(stdout(&o).contains("FAIL"));

    let small = write(dir.path(), "small.json", &MISMATCH.replace(r#""n_draws": 200000"#, r#""n_draws": 1000"#));
    assert_eq!(code(&run(&["validate", small.to_str().unwrap()])), 0);
}

#[test]
fn dump_normalized_round_trips() {
    let dir = TempDir::new().unwrap();
    std::fs::create_dir(dir.path().join("data")).unwrap();
    write(dir.path(), "data/sample.csv", "demand\n0.4\n0.9\n1.3\n");
    let text = MISMATCH.replace(
        r#""estimated_demand": {"family": "uniform", "lo": 0.0, "hi": 1.0},
  "parameter_uncertainties": [{"param": "hi", "dist": {"family": "empirical", "values": [1.2]}}],"#,
        r#""estimated_demand": {"family": "uniform", "lo": 0.0, "hi": 1.0},
  "true_demand": {"family": "mixture", "components": [
      {"weight": 0.5, "dist": {"family": "empirical", "path": "data/sample.csv"}},
      {"weight": 0.5, "dist": {"family": "exponential", "rate": 2.0}}]},"#,
    );
    let sc = write(dir.path(), "s.json", &text);
    let dump = dir.path().join("normalized.json");
    let o = run(&["solve", sc.to_str().unwrap(), "--dump-normalized", dump.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let dumped = std::fs::read_to_string(&dump).unwrap();
    assert!(!dumped.contains("sample.csv"));
    let first = ScenarioFile::parse(&dumped).unwrap();
    assert_eq!(first.compound_nodes, 64);

    // the dump is self-contained: it works from another directory
    let elsewhere = TempDir::new().unwrap();
    let moved = write(elsewhere.path(), "moved.json", &dumped);
    let dump2 = elsewhere.path().join("again.json");
    let o = run(&["solve", moved.to_str().unwrap(), "--dump-normalized", dump2.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert_eq!(ScenarioFile::parse(&std::fs::read_to_string(dump2).unwrap()).unwrap(), first);
}
