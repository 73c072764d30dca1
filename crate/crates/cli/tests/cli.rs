use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use carnot_tangent::ccfields::{CCStructure, PolyVectorField};
use carnot_tangent::{models, Jet, JetMap};
use carnot_tangent_cli::verify::check_names;
use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_carnot-tangent")).args(args).output().unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn fixtures_match_models() {
    for (name, x) in [
        ("heisenberg.json", models::heisenberg()),
        ("engel.json", models::engel()),
        ("abelian.json", models::abelian(3)),
        ("heisenberg_polarized.json", models::heisenberg_polarized()),
    ] {
        let text = std::fs::read_to_string(fixture(name)).unwrap();
        let y: CCStructure = serde_json::from_str(&text).unwrap();
        assert_eq!(y.fields(), x.fields(), "{name}");
    }
}

#[test]
fn bch_step_two() {
    let out = cli(&["bch", "--rank", "2", "--step", "2", "--a", "1,0,0", "--b", "0,1,0"]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["product"], serde_json::json!(["1", "1", "1/2"]));
    let out = cli(&["bch", "--rank", "2", "--step", "2", "--a", "1/2,-1,0", "--b", "-1/2,1,0"]);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["product"], serde_json::json!(["0", "0", "0"]));
}

#[test]
fn verify_heisenberg_passes_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for (out, jobs) in [(&a, "1"), (&b, "4")] {
        let o = cli(&["verify", path_str(&fixture("heisenberg.json")), "--out", path_str(out), "--jobs", jobs]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let ra = std::fs::read(a.join("report.json")).unwrap();
    assert_eq!(ra, std::fs::read(b.join("report.json")).unwrap());
    let v: Value = serde_json::from_slice(&ra).unwrap();
    assert_eq!(v["failed"], 0);
    let names: Vec<&str> = v["checks"].as_array().unwrap().iter().map(|c| c["name"].as_str().unwrap()).collect();
    assert_eq!(names, check_names());
    let exact: Vec<&Value> = v["checks"].as_array().unwrap().iter().filter(|c| c["exact"] == true).collect();
    assert!(exact.iter().all(|c| c["status"] == "pass"));
}

#[test]
fn verify_reports_failure_with_status_one() {
    // Engel is not step 2, so the pipeline fails under --step 2
    let o = cli(&["verify", path_str(&fixture("engel.json")), "--step", "2"]);
    assert_eq!(o.status.code(), Some(1));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["failed"], 1);
}

#[test]
fn approximate_abelian_is_identity() {
    let o = cli(&["approximate", path_str(&fixture("abelian.json"))]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    let fields: Vec<PolyVectorField> = serde_json::from_value(v["nilpotent_fields"].clone()).unwrap();
    for (f, g) in fields.iter().zip(models::abelian(3).fields()) {
        for (a, b) in f.components().iter().zip(g.components()) {
            assert_eq!(a.poly(), b.poly());
        }
    }
    let phi: Vec<Jet> = serde_json::from_value(v["chart"]["phi"].clone()).unwrap();
    assert!(JetMap::new(phi).unwrap().is_identity());
    assert_eq!(v["determinant"], "1");
}

#[test]
fn blowup_writes_csv_and_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let o = cli(&[
        "blowup",
        path_str(&fixture("heisenberg.json")),
        path_str(&fixture("linear.json")),
        "--t0",
        "0",
        "--eta",
        "0.1,0.01,0.001,0.0001",
        "--out",
        path_str(dir.path()),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_slice(&std::fs::read(dir.path().join("verdict.json")).unwrap()).unwrap();
    assert_eq!(v["limit_found"], true);
    let vx = v["v"][0].as_f64().unwrap();
    assert!((vx - 1.0).abs() < 1e-3);
    let csv = std::fs::read_to_string(dir.path().join("blowup_3.csv")).unwrap();
    assert!(csv.starts_with("tau,x1,x2,x3\n"));
    let row = csv.lines().nth(1).unwrap();
    assert_eq!(row.split(',').count(), 4);
}

#[test]
fn blowup_window_outside_domain_fails() {
    let dir = tempfile::tempdir().unwrap();
    let o = cli(&[
        "blowup",
        path_str(&fixture("heisenberg.json")),
        path_str(&fixture("two_legs.json")),
        "--t0",
        "0",
        "--eta",
        "0.5",
        "--window=-1,1",
        "--out",
        path_str(dir.path()),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("blowup"));
}

#[test]
fn lift_engel_circle() {
    let dir = tempfile::tempdir().unwrap();
    let o = cli(&[
        "lift",
        path_str(&fixture("engel.json")),
        path_str(&fixture("circle.json")),
        "--out",
        path_str(dir.path()),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&std::fs::read(dir.path().join("lift_report.json")).unwrap()).unwrap();
    assert!(v["projection_defect"].as_f64().unwrap() < 1e-6);
    assert!((v["length"].as_f64().unwrap() - 2.0 * std::f64::consts::PI).abs() < 1e-12);
    assert!(dir.path().join("lift.csv").exists());
}

#[test]
fn usage_and_parse_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"n\": 3,\n  \"r\": }").unwrap();
    let o = cli(&["verify", path_str(&bad)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));
    assert_eq!(cli(&["verify"]).status.code(), Some(2));
    assert_eq!(cli(&["bch", "--rank", "2", "--a", "1", "--b", "1"]).status.code(), Some(2));
    assert_eq!(cli(&["verify", path_str(&fixture("heisenberg.json")), "--tol", "-1"]).status.code(), Some(2));
}

#[test]
fn config_file_supplies_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, format!("step = 2\nout = \"{}\"\n", dir.path().join("o").display())).unwrap();
    let o = cli(&["bch", "--rank", "2", "--a", "1,0,0", "--b", "0,1,0", "--config", path_str(&cfg)]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&std::fs::read(dir.path().join("o/bch.json")).unwrap()).unwrap();
    assert_eq!(v["product"][2], "1/2");
}
