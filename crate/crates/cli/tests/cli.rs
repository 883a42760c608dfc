use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(name)
}

fn maslovlab(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_maslovlab"))
        .arg("--out-dir")
        .arg(out)
        .args(args)
        .env_remove("MASLOVLAB_SEED")
        .output()
        .expect("binary runs")
}

fn run_scenario(file: &str, out: &Path) -> (i32, Value) {
    let o = maslovlab(&["run", scenario(file).to_str().unwrap()], out);
    let stem = Path::new(file).file_stem().unwrap().to_str().unwrap();
    let text = std::fs::read_to_string(out.join(format!("{stem}.json"))).unwrap_or_else(|_| {
        panic!("no report; stderr: {}", String::from_utf8_lossy(&o.stderr));
    });
    (o.status.code().unwrap(), serde_json::from_str(&text).unwrap())
}

/// Parses a curve CSV, checking the header and that s never decreases.
fn curve(path: &Path, header: [&str; 3]) -> Vec<(f64, usize, f64)> {
    let mut r = csv::Reader::from_path(path).unwrap();
    assert_eq!(r.headers().unwrap(), &csv::StringRecord::from(header.to_vec()));
    let rows: Vec<(f64, usize, f64)> = r.deserialize().map(|x| x.unwrap()).collect();
    assert!(!rows.is_empty());
    assert!(rows.windows(2).all(|w| w[0].0 <= w[1].0), "s column not monotone in {}", path.display());
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).unwrap();
    for row in &rows {
        w.serialize(row).unwrap();
    }
    assert_eq!(String::from_utf8(w.into_inner().unwrap()).unwrap(), std::fs::read_to_string(path).unwrap());
    rows
}

#[test]
fn benchmark_scenario_reports_one_one() {
    let dir = tempfile::tempdir().unwrap();
    let (code, report) = run_scenario("benchmark.json", dir.path());
    assert_eq!(code, 0);
    assert_eq!(report["result"]["mas_plus"], 1);
    assert_eq!(report["result"]["mas_minus"], 1);
    let methods = report["result"]["methods"].as_array().unwrap();
    assert_eq!(methods.len(), 2);
    assert!(methods.iter().all(|m| m["mas_plus"] == 1 && m["mas_minus"] == 1));
    let crossings = report["result"]["crossings"].as_array().unwrap();
    assert_eq!(crossings.len(), 1);
    assert!((crossings[0]["t"].as_f64().unwrap() - 0.5).abs() < 1e-6);
    assert_eq!(report["result"]["theta_curves_ref"], "benchmark_theta.csv");
    curve(&dir.path().join("benchmark_theta.csv"), ["s", "branch_index", "theta"]);
}

#[test]
fn constant_scenario_reports_zero() {
    let dir = tempfile::tempdir().unwrap();
    let (code, report) = run_scenario("constant_path.json", dir.path());
    assert_eq!(code, 0);
    assert_eq!((report["result"]["mas_plus"].as_i64(), report["result"]["mas_minus"].as_i64()), (Some(0), Some(0)));
}

#[test]
fn scalar_desuspension_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let (code, report) = run_scenario("scalar_desuspension.json", dir.path());
    assert_eq!(code, 0);
    let r = &report["result"];
    assert_eq!((r["sf"].as_i64(), r["neg_mas"].as_i64(), r["agree"].as_bool()), (Some(1), Some(1), Some(true)));
    let eig = curve(&dir.path().join("scalar_desuspension_eigen.csv"), ["s", "eig_index", "value"]);
    assert!((eig[0].0 + 1.0).abs() < 1e-12 && (eig.last().unwrap().0 - 1.0).abs() < 1e-12);
    curve(&dir.path().join("scalar_desuspension_theta.csv"), ["s", "branch_index", "theta"]);
}

#[test]
fn remaining_scenarios_succeed() {
    let dir = tempfile::tempdir().unwrap();
    for file in ["planar_dirichlet.json", "modulated_splitting.json", "spectral_flow.json", "reduction.json", "random_path.json"] {
        let (code, report) = run_scenario(file, dir.path());
        assert_eq!(code, 0, "{file}");
        if let Some(agree) = report["result"].get("agree") {
            assert_eq!(agree, true, "{file}");
        }
    }
    let (code, report) = run_scenario("properties.json", dir.path());
    assert_eq!(code, 0);
    assert_eq!(report["result"]["failures"], 0);
    assert_eq!(report["result"]["suites"].as_array().unwrap().len(), 5);
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for dir in [&a, &b] {
        assert_eq!(run_scenario("random_path.json", dir.path()).0, 0);
    }
    for file in ["random_path.json", "random_path_theta.csv"] {
        let x = std::fs::read(a.path().join(file)).unwrap();
        let y = std::fs::read(b.path().join(file)).unwrap();
        assert_eq!(x, y, "{file}");
    }
}

#[test]
fn environment_seed_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_maslovlab"))
        .arg("--out-dir")
        .arg(dir.path())
        .args(["run", scenario("spectral_flow.json").to_str().unwrap()])
        .env("MASLOVLAB_SEED", "424242")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let report: Value = serde_json::from_slice(&std::fs::read(dir.path().join("spectral_flow.json")).unwrap()).unwrap();
    assert_eq!(report["seed"], 424242);
    assert_eq!(report["result"]["agree"], true);
}

#[test]
fn schema_violations_exit_one_with_field() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"schema": 1, "kind": "maslov_path", "params": {"path": "random", "samples": -3}}"#).unwrap();
    let o = maslovlab(&["run", bad.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("params.samples"));
    let o = maslovlab(&["run", dir.path().join("missing.json").to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(!dir.path().join("bad_theta.csv").exists());
}

#[test]
fn tolerance_flags_reach_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let o = maslovlab(&["--tol-rank", "1e-9", "--tol-zero", "1e-8", "run", scenario("benchmark.json").to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let report: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["tolerances"]["rank"], 1e-9);
    assert_eq!(report["tolerances"]["zero"], 1e-8);
    assert_eq!(maslovlab(&["--tol-rank", "3", "verify", "flipping"], dir.path()).status.code(), Some(1));
}

#[test]
fn verify_prints_table() {
    let dir = tempfile::tempdir().unwrap();
    for suite in ["flipping", "catenation"] {
        let o = maslovlab(&["verify", suite, "--trials", "100", "--seed", "3"], dir.path());
        assert_eq!(o.status.code(), Some(0), "{suite}");
        let out = String::from_utf8(o.stdout).unwrap();
        let mut lines = out.lines();
        let header: Vec<&str> = lines.next().unwrap().split_whitespace().collect();
        assert_eq!(header, ["suite", "identity", "trials", "failures"]);
        let row: Vec<&str> = lines.next().unwrap().split_whitespace().collect();
        assert_eq!((row[0], row[row.len() - 2], row[row.len() - 1]), (suite, "100", "0"));
    }
    let o = maslovlab(&["verify", "no_such_suite"], dir.path());
    assert_eq!(o.status.code(), Some(1));
}
