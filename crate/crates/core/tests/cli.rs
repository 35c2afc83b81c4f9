use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_lsi-lab"))
}

fn corpus(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus").join(format!("{name}.json"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn close(v: &Value, expected: f64, tol: f64) -> bool {
    (v.as_f64().unwrap() - expected).abs() <= tol
}

#[test]
fn analyze_gamma_is_all_zero() {
    let out = run(&["analyze", corpus("gamma_1d").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    for key in ["H", "I", "deficit"] {
        assert!(close(&r["functionals"][key], 0.0, 1e-12), "{key}");
    }
    assert!(close(&r["stein_discrepancy"]["value"], 0.0, 1e-12));
    assert!(close(&r["w2"]["value"], 0.0, 1e-9));
}

#[test]
fn analyze_wide_gaussian() {
    let out = run(&["analyze", corpus("gauss_var4").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert!(close(&r["functionals"]["H"], 0.806853, 1e-6));
    assert!(close(&r["functionals"]["I"], 2.25, 1e-6));
    assert!(close(&r["functionals"]["deficit"], 0.318147, 1e-6));
    assert!(close(&r["deficit_via_mmse"]["value"], 0.318147, 1e-6));
    assert!(close(&r["stein_discrepancy"]["value"], 3.0, 1e-6));
    assert!(close(&r["w2"]["value"], 1.0, 1e-6));
    assert_eq!(r["w2"]["method"], "quantile-1d");
    assert!(r["spec_hash"].as_str().unwrap().len() == 64);
}

#[test]
fn analyze_extremal() {
    let out = run(&["analyze", corpus("extremal_1").to_str().unwrap()]);
    let r = json(&out);
    assert!(close(&r["functionals"]["deficit"], 0.0, 1e-12));
    assert!(close(&r["functionals"]["H"], 0.5, 1e-12));
    assert!(close(&r["functionals"]["I"], 1.0, 1e-12));
}

#[test]
fn floats_carry_seventeen_digits() {
    let out = run(&["analyze", corpus("gauss_var4").to_str().unwrap()]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(
        text.contains("\"I\":2.2499999999999991e0") || text.contains("\"I\":2.2500000000000000e0"),
        "{}",
        &text[..400]
    );
}

#[test]
fn analyze_is_byte_identical() {
    let spec = corpus("mix2d");
    let a = run(&["analyze", spec.to_str().unwrap(), "--seed", "7"]);
    let b = run(&["analyze", spec.to_str().unwrap(), "--seed", "7", "--threads", "2"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn verify_gamma_exits_zero() {
    let out = run(&["verify", corpus("gamma_1d").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let reports = json(&out);
    let reports = reports.as_array().unwrap();
    assert_eq!(reports.len(), 15);
    assert!(reports.iter().all(|r| r["spec_hash"].as_str().is_some()));
}

#[test]
fn verify_corpus_directory() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "verify",
        Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus").to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let reports: Vec<_> = std::fs::read_dir(dir.path()).unwrap().collect();
    assert_eq!(reports.len(), 12);
}

#[test]
fn input_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"family":"mixture","dim":1,"components":[{"weight":0.9,"mean":[0],"cov":[[1]]}]}"#)
        .unwrap();
    let out = run(&["verify", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("0.9"));

    let garbled = dir.path().join("garbled.json");
    std::fs::write(&garbled, "{ not json").unwrap();
    assert_eq!(run(&["analyze", garbled.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(run(&["analyze", "/nonexistent/spec.json"]).status.code(), Some(2));
    assert_eq!(run(&["analyze", corpus("gamma_1d").to_str().unwrap(), "--tol", "-1"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
}

fn flow(name: &str, times: &str) -> Vec<Vec<String>> {
    let out = run(&["flow", corpus(name).to_str().unwrap(), "--times", times]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let mut rdr = csv::Reader::from_reader(out.stdout.as_slice());
    assert_eq!(rdr.headers().unwrap().len(), 6);
    rdr.records().map(|r| r.unwrap().iter().map(str::to_owned).collect()).collect()
}

#[test]
fn flow_gamma() {
    // Every column vanishes except ρ(t) = e^{-2t}, since E(X | X_t) = e^{-t} X_t.
    for row in flow("gamma_1d", "0,0.5,2") {
        let v: Vec<f64> = row.iter().map(|c| c.parse().unwrap()).collect();
        for k in [1, 2, 4, 5] {
            assert!(v[k].abs() < 1e-12, "{row:?}");
        }
        assert!((v[3] - (-2.0 * v[0]).exp()).abs() < 1e-10, "{row:?}");
    }
}

#[test]
fn flow_row_at_one_third() {
    let t = 0.5 * 3f64.ln();
    let rows = flow("gauss_var4", &format!("{t}"));
    let v: Vec<f64> = rows[0].iter().map(|c| c.parse().unwrap()).collect();
    let expected = [t, 0.5, 1.5, 8.0 / 3.0, 2.0 - 2f64.sqrt(), 0.25];
    for (got, want) in v.iter().zip(expected) {
        assert!((got - want).abs() < 1e-9, "{v:?}");
    }
}

#[test]
fn flow_leaves_uncentered_columns_empty() {
    for row in flow("extremal_1", "0,1") {
        assert!(row[2].is_empty() && row[3].is_empty(), "{row:?}");
        assert!(!row[1].is_empty() && !row[4].is_empty());
    }
}
