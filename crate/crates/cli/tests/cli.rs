use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn csplab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_csplab")).args(args).output().unwrap()
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_string()
}

#[test]
fn generate_then_solve_random() {
    let dir = tempfile::tempdir().unwrap();
    let inst = path(dir.path(), "r.json");
    let out = csplab(&["generate", "--model", "random", "--n", "5", "--d", "2", "--m", "10", "--t", "4", "--seed", "7", "--out", &inst]);
    assert!(out.status.success());
    let report = json(&csplab(&["solve", "--instance", &inst, "--lookahead", "gac", "--lookback", "cbj", "--mode", "count"]));
    assert_eq!(report["solutions"], 32);
    assert_eq!(report["status"], "COMPLETE");
    let traced = json(&csplab(&["solve", "--instance", &inst, "--trace", "--mode", "first"]));
    assert_eq!(traced["trace"].as_array().unwrap().len() as u64, traced["nodes"].as_u64().unwrap());
    assert_eq!(traced["assignments"].as_array().unwrap().len(), 1);
}

#[test]
fn advisor_round_trip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let inst = path(dir.path(), "p.json");
    let order = path(dir.path(), "order.txt");
    let tree = path(dir.path(), "tree.json");
    assert!(csplab(&["generate", "--model", "pigeonhole", "--n", "4", "--k", "2", "--variant", "b", "--order-out", &order, "--out", &inst]).status.success());
    let given = format!("given:{order}");
    let cbj = json(&csplab(&["solve", "--instance", &inst, "--lookback", "cbj", "--heuristic", &given, "--tree-out", &tree]));
    let advisor = format!("advisor:{tree}");
    let bt = json(&csplab(&["solve", "--instance", &inst, "--heuristic", &advisor]));
    assert!(bt["nodes"].as_u64().unwrap() <= cbj["nodes"].as_u64().unwrap());
}

#[test]
fn compare_reports_inclusion_and_witnesses() {
    let dir = tempfile::tempdir().unwrap();
    let inst = path(dir.path(), "p.json");
    let order = path(dir.path(), "order.txt");
    assert!(csplab(&["generate", "--model", "pigeonhole", "--n", "5", "--k", "2", "--variant", "b", "--order-out", &order, "--out", &inst]).status.success());
    let d = json(&csplab(&["compare", "--instance", &inst, "--config-a", "bc+cbj", "--config-b", "bc+chrono", "--order", &order]));
    assert_eq!(d["subset"], true);
    let d = json(&csplab(&["compare", "--instance", &inst, "--config-a", "bc+cbj", "--config-b", "mc:2+chrono", "--order", &order]));
    assert_eq!(d["subset"], false);
    assert!(!d["witnesses"].as_array().unwrap().is_empty());
}

#[test]
fn suite_writes_csv_and_ratio_table() {
    let dir = tempfile::tempdir().unwrap();
    let spec = path(dir.path(), "spec.json");
    fs::write(
        &spec,
        r#"{"instances": [{"model": "random", "n": 8, "d": 3, "m": 12, "t": 5, "seed": 1, "count": 3},
                          {"model": "random", "n": 8, "d": 4, "m": 12, "t": 9, "seed": 1, "count": 3}],
            "configs": [{"lookahead": "gac", "lookback": "cbj"}, {"lookahead": "gac", "lookback": "chrono"}]}"#,
    )
    .unwrap();
    let out = path(dir.path(), "rows.csv");
    let run = csplab(&[
        "suite", "--spec", &spec, "--out", &out, "--ratio-param", "d", "--config-a", "gac+cbj+lex", "--config-b", "gac+chrono+lex",
    ]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let csv = fs::read_to_string(&out).unwrap();
    assert_eq!(csv.lines().count(), 13);
    assert_eq!(csv.lines().next().unwrap(), "instance,config,status,solutions,nodes,checks,backjumps_total,elapsed_ms");
    let table = String::from_utf8(run.stdout).unwrap();
    let lines: Vec<_> = table.lines().collect();
    assert_eq!(lines[0], "d,gac+cbj+lex,gac+chrono+lex,ratio");
    assert!(lines[1].starts_with("3,") && lines[2].starts_with("4,"));
}

#[test]
fn suite_with_a_missing_instance_fails_with_rows() {
    let dir = tempfile::tempdir().unwrap();
    let spec = path(dir.path(), "spec.json");
    fs::write(&spec, r#"{"instances": [{"model": "file", "path": "missing.json"}], "configs": [{"lookahead": "bc", "lookback": "cbj"}], "format": "json"}"#).unwrap();
    let run = csplab(&["suite", "--spec", &spec, "--format", "json"]);
    assert_eq!(run.status.code(), Some(2));
    let rows: Value = serde_json::from_slice(&run.stdout).unwrap();
    assert_eq!(rows[0]["status"], "LOAD_ERROR");
}

#[test]
fn exit_codes() {
    assert_eq!(csplab(&[]).status.code(), Some(1));
    assert_eq!(csplab(&["solve", "--instance", "x.json", "--lookback", "bj:0"]).status.code(), Some(1));
    assert_eq!(csplab(&["solve", "--instance", "/nonexistent/x.json"]).status.code(), Some(2));
    assert_eq!(csplab(&["generate", "--model", "random", "--n", "3"]).status.code(), Some(1));
    assert_eq!(csplab(&["--help"]).status.code(), Some(0));
}

#[test]
fn crossword_generation_and_calibration() {
    let dir = tempfile::tempdir().unwrap();
    let inst = path(dir.path(), "cw.json");
    assert!(csplab(&["generate", "--model", "crossword", "--grid", "figure7", "--out", &inst]).status.success());
    let problem: Value = serde_json::from_str(&fs::read_to_string(&inst).unwrap()).unwrap();
    assert_eq!(problem["variables"].as_array().unwrap().len(), 10);
    assert_eq!(problem["constraints"].as_array().unwrap().len(), 34);
    let c = json(&csplab(&["calibrate", "--model-params", "10,3,2,20", "--samples", "10"]));
    assert!(c["t"].as_u64().unwrap() >= 1);
}
