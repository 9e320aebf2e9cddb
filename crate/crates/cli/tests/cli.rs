use std::process::{Command, Output};

use serde_json::Value;

fn pplab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pplab"))
        .args(args)
        .env_remove("PPLAB_TOL")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid JSON")
}

fn recompute(report: &Value) -> f64 {
    let values: Vec<f64> = report["pseudo_probabilities"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| e["value"].as_f64().unwrap())
        .collect();
    let poly = |terms: &Value| -> f64 {
        terms
            .as_array()
            .unwrap()
            .iter()
            .map(|t| {
                t["coef"].as_f64().unwrap()
                    * t["factors"].as_array().unwrap().iter().map(|i| values[i.as_u64().unwrap() as usize]).product::<f64>()
            })
            .sum()
    };
    let c = &report["combination"];
    if let Some(p) = c.get("polynomial") {
        poly(p)
    } else {
        c["max"].as_array().unwrap().iter().map(poly).fold(f64::NEG_INFINITY, f64::max)
    }
}

#[test]
fn chsh_singlet() {
    let r = json(&pplab(&["test", "chsh", "--werner", "1.0"]));
    let s = r["statistic"].as_f64().unwrap();
    assert!((s - (1.0 - 2f64.sqrt()) / 2.0).abs() < 1e-12);
    assert_eq!(r["verdict"], Value::Bool(true));
    assert!((recompute(&r) - s).abs() < 1e-10);
}

#[test]
fn every_test_emits_a_self_consistent_report() {
    let runs: [&[&str]; 11] = [
        &["test", "coherence", "--bloch", "0.8,0,0", "--a1", "-0.707,0,0.707", "--a2", "-0.707,0,-0.707"],
        &["test", "boolean-dep", "--bloch", "1,0,0"],
        &["test", "boolean-indep"],
        &["test", "distributivity", "--bloch", "0,0,-1"],
        &["test", "chsh", "--werner", "0.6"],
        &["test", "ent-linear-1", "--werner", "0.7"],
        &["test", "ent-linear-2", "--werner", "0.7"],
        &["test", "ent-nl-1", "--werner", "0.7"],
        &["test", "ent-nl-2", "--werner", "0.7"],
        &["test", "ent-nl-3", "--werner", "0.7"],
        &["test", "discord", "--werner", "1"],
    ];
    for args in runs {
        let r = json(&pplab(args));
        let s = r["statistic"].as_f64().unwrap();
        assert!((recompute(&r) - s).abs() < 1e-10, "{args:?}");
    }
}

#[test]
fn alpha_scan_emits_one_report_per_point() {
    let r = json(&pplab(&["test", "ent-linear-1", "--werner", "0.7", "--alpha-scan", "1.0:2.0:0.25"]));
    let arr = r.as_array().unwrap();
    assert_eq!(arr.len(), 5);
    assert!((arr[4]["inputs"]["alpha"].as_f64().unwrap() - 2.0).abs() < 1e-12);
}

#[test]
fn game_example() {
    let r = json(&pplab(&["game", "run", "--bloch", "1,0,0", "--axis", "0,0,1", "--t-max", "1.5708"]));
    assert!((r["best_score"].as_f64().unwrap() - 1.1036).abs() < 5e-5);
    assert!((r["best_time"].as_f64().unwrap() - std::f64::consts::FRAC_PI_4).abs() < 1e-3);
}

#[test]
fn exit_codes() {
    assert_eq!(pplab(&["test", "chsh"]).status.code(), Some(1));
    assert_eq!(pplab(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(pplab(&["test", "ent-nl-1", "--werner", "1", "--alpha", "90deg"]).status.code(), Some(1));
    assert_eq!(pplab(&["test", "chsh", "--werner", "1", "--bloch", "0,0,1"]).status.code(), Some(1));
    let orthogonal = pplab(&["weak", "value", "--bloch", "0,0,1", "--axis", "1,0,0", "--post-bloch", "0,0,-1"]);
    assert_eq!(orthogonal.status.code(), Some(2));
    // deterministic
    assert_eq!(pplab(&["test", "chsh", "--werner", "0.9"]).stdout, pplab(&["test", "chsh", "--werner", "0.9"]).stdout);
}

#[test]
fn state_files_are_validated() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"dim": 2, "re": [[0.5, 0], [0, 0.4]], "im": [[0, 0], [0, 0]]}"#).unwrap();
    let out = pplab(&["test", "coherence", "--state", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("trace = 1"));

    let good = dir.path().join("good.json");
    std::fs::write(&good, r#"{"dim": 2, "re": [[0.5, 0.5], [0.5, 0.5]], "im": [[0, 0], [0, 0]]}"#).unwrap();
    let report = dir.path().join("report.json");
    let out = pplab(&["test", "boolean-dep", "--state", good.to_str().unwrap(), "--out", report.to_str().unwrap()]);
    assert!(out.status.success());
    let r: Value = serde_json::from_str(&std::fs::read_to_string(report).unwrap()).unwrap();
    assert!((r["statistic"].as_f64().unwrap() - 0.25).abs() < 1e-12);
}

#[test]
fn tolerance_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_pplab"))
        .args(["test", "chsh", "--werner", "1"])
        .env("PPLAB_TOL", "1.0")
        .output()
        .unwrap();
    let r = json(&out);
    assert_eq!(r["verdict"], Value::Bool(false));
    assert_eq!(r["tolerance"].as_f64(), Some(1.0));
}

#[test]
fn other_commands() {
    let r = json(&pplab(&["scheme", "build", "--bloch", "1,0,0", "--obs", "1,0,0", "--obs", "0,1,0"]));
    assert!((r["scheme"]["entries"]["+-"].as_f64().unwrap() - 0.5).abs() < 1e-12);
    let r = json(&pplab(&["pp", "eig", "--proj", "0,0,1", "--proj", "1,0,0"]));
    assert!((r["certificate"]["min_eigenvalue"].as_f64().unwrap() - (1.0 - 2f64.sqrt()) / 4.0).abs() < 1e-12);
    let r = json(&pplab(&["weak", "value", "--bloch", "1,0,0", "--axis", "0,0,1", "--post-bloch", "0,0,1"]));
    assert!((r["value"]["re"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    let r = json(&pplab(&["pointer", "sim", "--bloch", "0,0,0", "--proj", "0,0,1", "--proj", "1,0,0", "--json-indent", "0"]));
    let ratio = r["result"]["ratio"].as_f64().unwrap();
    assert!((ratio - 1.0).abs() < 0.05);
}
