use serde_json::Value;
use std::path::Path;
use std::process::{Command, Output};
use zollforms::cli::{check_digest, parse_metric, RunConfig, CSV_HEADER, SCHEMA_VERSION};
use zollforms::surface::MetricSpec;

fn zollforms(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_zollforms")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("stdout is JSON")
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn constants_prints_table_and_writes_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("constants.json");
    let o = zollforms(&["constants", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("p1_global_constant") && text.contains("[pass] e_2_is_0"));
    let v = read_json(&out);
    assert!(v["checks"].as_array().unwrap().iter().all(|c| c["passed"] == true));
}

#[test]
fn verify_passes_on_zoll() {
    let o = zollforms(&["verify", "--metric", "zoll:0.1,0.05", "--geodesics", "6", "--grid", "512"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&o);
    assert_eq!(v["schema"], SCHEMA_VERSION);
    assert_eq!(v["command"], "verify");
    assert_eq!(v["summary"]["passed"], true);
    assert_eq!(v["geodesics"].as_array().unwrap().len(), 6);
    assert!(check_digest(&v));
}

#[test]
fn verify_names_the_cube_check_on_the_control() {
    let o = zollforms(&["verify", "--metric", "control:0.3", "--geodesics", "5", "--grid", "256"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("check_cube"));
    let v = json(&o);
    assert_eq!(v["summary"]["first_failure"], "check_cube");
}

#[test]
fn invariants_report_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let (out, csv) = (dir.path().join("r.json"), dir.path().join("r.csv"));
    let o = zollforms(&[
        "invariants",
        "--metric",
        "zoll:0.1",
        "--geodesics",
        "4",
        "--grid",
        "512",
        "--out",
        out.to_str().unwrap(),
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(o.stdout.is_empty());
    let v = read_json(&out);
    assert!(check_digest(&v));
    assert_eq!(v["header"]["config"]["grid"], 512);
    let mut reader = csv::Reader::from_path(&csv).unwrap();
    let header: Vec<String> = reader.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(header, CSV_HEADER);
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 4);
    let c2: f64 = rows[2][7].parse().unwrap();
    assert!(c2.abs() < 1e-7);
}

#[test]
fn reports_are_deterministic() {
    let args = ["invariants", "--metric", "zoll:0.15", "--geodesics", "3", "--grid", "256", "--seed", "7"];
    let (a, b) = (zollforms(&args), zollforms(&args));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(json(&a)["digest"], json(&b)["digest"]);
    let c = zollforms(&["invariants", "--metric", "zoll:0.15", "--geodesics", "3", "--grid", "256", "--seed", "8"]);
    assert_ne!(json(&a)["digest"], json(&c)["digest"]);
}

#[test]
fn tampered_report_fails_digest() {
    let o = zollforms(&["verify", "--geodesics", "2", "--grid", "256"]);
    let mut v = json(&o);
    assert!(check_digest(&v));
    v["summary"]["passed"] = Value::Bool(false);
    assert!(!check_digest(&v));
}

#[test]
fn config_file_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(
        &cfg,
        r#"{"metric": {"kind": "zoll_revolution", "h_odd_coeffs": [0.1]}, "geodesics": 3, "grid": 256, "seed": 4}"#,
    )
    .unwrap();
    let o = zollforms(&["verify", "--config", cfg.to_str().unwrap(), "--geodesics", "2"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["geodesics"].as_array().unwrap().len(), 2);
    assert_eq!(v["header"]["config"]["seed"], 4);
    assert_eq!(v["header"]["config"]["metric"]["kind"], "zoll_revolution");
}

#[test]
fn configuration_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"geodesics": 3, "colour": "blue"}"#).unwrap();
    let cases: Vec<Vec<&str>> = vec![
        vec!["verify", "--config", cfg.to_str().unwrap()],
        vec!["verify", "--metric", "flat"],
        vec!["verify", "--metric", "zoll:5"],
        vec!["verify", "--grid", "1000"],
        vec!["invariants", "--geodesics", "0"],
        vec!["invariants", "--tol", "-1"],
        vec!["verify", "--config", "/nonexistent/run.json"],
        vec!["verify", "--unknown-flag"],
        vec!["frobnicate"],
    ];
    for args in cases {
        assert_eq!(code(&zollforms(&args)), 2, "{args:?}");
    }
    assert_eq!(code(&zollforms(&["--help"])), 0);
    assert_eq!(code(&zollforms(&["--version"])), 0);
}

#[test]
fn config_parsing() {
    assert_eq!(RunConfig::from_json("{}").unwrap(), RunConfig::default());
    assert!(RunConfig::from_json(r#"{"metric": {"kind": "round", "radius": 2}}"#).is_err());
    assert!(RunConfig::from_json(r#"{"grid": "big"}"#).is_err());
    assert_eq!(parse_metric("round").unwrap(), MetricSpec::Round {});
    assert_eq!(
        parse_metric("control:0.3").unwrap(),
        MetricSpec::RevolutionControl { h_even_coeffs: vec![0.3] }
    );
    assert_eq!(
        parse_metric("zoll:0.1, 0.05").unwrap(),
        MetricSpec::ZollRevolution { h_odd_coeffs: vec![0.1, 0.05] }
    );
    assert!(parse_metric("zoll:x").is_err());
    assert!(parse_metric("round:1").is_err());
}

#[test]
fn round_invariants_pass_their_checks() {
    let o = zollforms(&["invariants", "--geodesics", "4", "--grid", "256"]);
    assert_eq!(code(&o), 0);
    let s = &json(&o)["summary"];
    assert!((s["c0_min"].as_f64().unwrap() + 0.25).abs() < 1e-9);
    assert!(s["c0_spread"].as_f64().unwrap() < 1e-9);
}

#[test]
fn control_invariants_fail() {
    let o = zollforms(&["invariants", "--metric", "control:0.3", "--geodesics", "4", "--grid", "256"]);
    assert_eq!(code(&o), 1);
    let v = json(&o);
    assert!(v["geodesics"].as_array().unwrap().iter().any(|g| g.get("error").is_some()));
}
