use std::f64::consts::LN_2;
use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_depbound"));
    c.env_remove("DEPBOUND_SEED");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("cli-tests");
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn walk_bound_at_root_n() {
    let v = json(&run(&["bound", "--scenario", "ssrw", "--n", "100", "--t", "sqrt_n", "--alpha", "inf"]));
    let got = v["log_bound"].as_f64().unwrap();
    let want = -(2.0 - LN_2 / 2.0) * 1e4 - LN_2 / 2.0 * 1e2 + LN_2;
    assert!(((got - want) / want).abs() < 1e-12, "{got} vs {want}");
    assert_eq!(v["trivial"], Value::Bool(false));
}

#[test]
fn hellinger_of_the_worked_example() {
    let v = json(&run(&["divergence", "--kind", "hellinger", "--alpha", "2", "--nu", "1/3,2/3", "--mu", "1/2,1/2"]));
    assert_eq!(v["H_alpha"], "10/9 ≈ 1.1111");
}

#[test]
fn comparison_sweep_as_csv() {
    let out = run(&["compare", "--scenario", "binary", "--lambda", "0.25", "--pair", "ours-vs-fan", "--alpha", "inf", "--format", "csv"]);
    assert!(out.status.success());
    let mut r = csv::Reader::from_reader(out.stdout.as_slice());
    let header: Vec<String> = r.headers().unwrap().iter().map(String::from).collect();
    assert!(header.contains(&"t_bar".to_string()));
    assert!(header.contains(&"ours_log_bound".to_string()) && header.contains(&"theirs_log_bound".to_string()));
    let rows: Vec<csv::StringRecord> = r.records().map(|x| x.unwrap()).collect();
    assert_eq!(rows.len(), 20);
    let idx = |name: &str| header.iter().position(|h| h == name).unwrap();
    let ts: Vec<f64> = rows.iter().map(|x| x[idx("t")].parse().unwrap()).collect();
    assert!(ts.windows(2).all(|w| w[0] < w[1]));
    let t_bar: f64 = rows[0][idx("t_bar")].parse().unwrap();
    for row in &rows {
        let t: f64 = row[idx("t")].parse().unwrap();
        let ours_smaller = &row[idx("ours_smaller")] == "true";
        if t > 1.01 * t_bar {
            assert!(ours_smaller, "t={t}");
        }
    }
    // Manifest goes to stderr when CSV is on stdout.
    let m: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(m["manifest"]["command"], "compare");
}

#[test]
fn validation_errors_exit_with_2() {
    let out = run(&["bound", "--n", "0"]);
    assert_eq!(out.status.code(), Some(2));
    let e: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(e["error"]["exit_code"], 2);
    assert_eq!(run(&["bound", "--no-such-flag", "1"]).status.code(), Some(2));
    assert_eq!(run(&["bound", "--scenario", "nowhere"]).status.code(), Some(2));
}

#[test]
fn computation_errors_exit_with_3() {
    let out = run(&["divergence", "--nu", "1/2,1/2", "--mu", "1,0"]);
    assert_eq!(out.status.code(), Some(3));
    let e: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(e["error"]["kind"], "AbsoluteContinuityViolation");
    let out = run(&["mcmc", "--kernel", "flip:0.25", "--nu", "1,0", "--n", "1000", "--t", "0.3", "--target", "-5"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn config_files() {
    let good = scratch("good.json");
    std::fs::write(&good, r#"{"command": "bound", "scenario": "ssrw", "n": 100, "t": "sqrt_n", "alpha": "inf"}"#).unwrap();
    let from_config = run(&["--config", good.to_str().unwrap()]);
    let from_flags = run(&["bound", "--scenario", "ssrw", "--n", "100", "--t", "sqrt_n", "--alpha", "inf"]);
    assert_eq!(json(&from_config)["log_bound"], json(&from_flags)["log_bound"]);

    let bad = scratch("bad.json");
    std::fs::write(&bad, r#"{"command": "bound", "scenario": "ssrw", "colour": "blue"}"#).unwrap();
    let out = run(&["--config", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("colour"));
}

#[test]
fn manifest_echoes_resolved_config() {
    let v = json(&run(&["bound", "--scenario", "binary", "--lambda", "1/5", "--n", "30", "--t", "0.4"]));
    let cfg = &v["manifest"]["config"];
    assert_eq!(cfg["lambda"], "1/5");
    assert_eq!(cfg["n"], 30);
    assert_eq!(cfg["route"], "auto");
    assert_eq!(cfg["centering"], "product-mean");
}

#[test]
fn reruns_are_byte_identical() {
    let args = ["simulate", "--scenario", "nonmarkov", "--n", "30", "--samples", "5000", "--seed", "17", "--t", "0.2,0.4"];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let args = ["tensor", "--scenario", "binary", "--lambda", "0.3", "--n", "6"];
    assert_eq!(run(&args).stdout, run(&args).stdout);
}

#[test]
fn seed_from_environment() {
    let args = ["simulate", "--scenario", "binary", "--n", "20", "--samples", "3000", "--t", "0.1,0.2"];
    let env = bin().args(args).env("DEPBOUND_SEED", "99").output().unwrap();
    let flag = run(&[&args[..], &["--seed", "99"]].concat());
    let other = run(&[&args[..], &["--seed", "98"]].concat());
    let (env, flag, other) = (json(&env), json(&flag), json(&other));
    assert_eq!(env["manifest"]["seed"], 99);
    assert_eq!(env["estimates"], flag["estimates"]);
    assert_ne!(env["estimates"], other["estimates"]);
}

#[test]
fn help_lists_scenarios_and_formulas() {
    let out = run(&["--help"]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    for s in ["binary", "ssrw", "nonmarkov", "coins", "chain"] {
        assert!(text.contains(s), "{s} missing");
    }
    for cmd in ["divergence", "kernel", "tensor", "bound", "compare", "simulate", "oracle", "mcmc"] {
        assert!(text.contains(cmd), "{cmd} missing");
    }
    assert!(text.contains("Hellinger") && text.contains("Kontorovich"));
}

#[test]
fn json_round_trips_exactly() {
    let out = run(&["bound", "--scenario", "binary", "--lambda", "1/3", "--n", "50", "--t", "0.45", "--alpha", "3"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let v: Value = serde_json::from_str(&text).unwrap();
    let x = v["log_bound"].as_f64().unwrap();
    assert_eq!(format!("{x:.16e}"), text.split("\"log_bound\":").nth(1).unwrap().split(',').next().unwrap());
    let keys: Vec<&String> = v.as_object().unwrap().keys().collect();
    assert!(keys.windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn output_and_manifest_files() {
    let out_path = scratch("cmp.csv");
    let status = run(&["compare", "--lambda", "0.2", "--points", "3", "--format", "csv", "--out", out_path.to_str().unwrap()]);
    assert!(status.status.success());
    let text = std::fs::read_to_string(&out_path).unwrap();
    assert_eq!(text.lines().count(), 4);
    let mut m = out_path.clone().into_os_string();
    m.push(".manifest.json");
    let manifest: Value = serde_json::from_str(&std::fs::read_to_string(m).unwrap()).unwrap();
    assert_eq!(manifest["config"]["points"], 3);
}

#[test]
fn other_commands_run() {
    for args in [
        vec!["kernel", "--kernel", "flip:1/4", "--alpha", "3"],
        vec!["tensor", "--scenario", "ssrw", "--n", "8", "--alpha", "2"],
        vec!["oracle", "--scenario", "nonmarkov", "--n", "6", "--functional", "fraction-positive"],
        vec!["mcmc", "--kernel", "flip:0.25", "--nu", "1,0", "--n", "1000", "--t", "0.3"],
        vec!["mcmc", "--kernel", "flip:0.25", "--nu", "1,0", "--n", "1000", "--t", "0.6", "--target", "-5"],
        vec!["schema"],
    ] {
        let out = run(&args);
        assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        let _: Value = serde_json::from_slice(&out.stdout).unwrap();
    }
}
