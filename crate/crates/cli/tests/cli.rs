use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use saddle_core::system::parse_document;
use saddle_core::System;
use serde_json::Value;

fn saddle(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_saddle"))
        .args(args)
        .current_dir(workspace())
        .output()
        .expect("the binary runs")
}

fn workspace() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn table(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect()
}

fn write_system(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_owned()
}

#[test]
fn expand_euler_gives_log_factorials() {
    let o = saddle(&["expand", "--input", "systems/euler.json", "--order", "10"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.starts_with("# tool=saddle "));
    assert!(text.contains("# order=10"));
    let rows = table(&text);
    assert_eq!(rows.len(), 10);
    let mut log_fact = 0.0f64;
    for (i, row) in rows.iter().enumerate() {
        let n = i + 1;
        if n > 1 {
            log_fact += ((n - 1) as f64).ln();
        }
        assert_eq!(row[0], n.to_string());
        assert_eq!(row[1], if n % 2 == 1 { "1" } else { "-1" });
        let lm: f64 = row[2].parse().unwrap();
        assert!((lm - log_fact).abs() < 1e-12, "n = {n}");
    }
}

#[test]
fn expand_zero_system_is_all_zero() {
    let o = saddle(&["expand", "--input", "systems/zero.json", "--order", "12"]);
    assert!(o.status.success());
    for row in table(&stdout(&o)) {
        assert_eq!(row[1], "0");
        assert_eq!(row[2], "-inf");
    }
}

#[test]
fn expand_json_lists_every_order() {
    let o = saddle(&["expand", "--input", "systems/riccati_generic.json", "--order", "20", "--format", "json"]);
    assert!(o.status.success());
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 20);
    assert_eq!(v["meta"]["command"], "expand");
}

#[test]
fn input_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = saddle(&["expand", "--input", "systems/does_not_exist.json"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("cannot read"));

    let bad = write_system(dir.path(), "bad.json", r#"{"kind": "raw", "a": 0.0, "f": [[0, 1, 0.5]]}"#);
    let o = saddle(&["expand", "--input", &bad]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("f[0,1]"), "{}", stderr(&o));

    let o = saddle(&["expand", "--bogus"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn sinf_on_branch_and_on_zero_manifold() {
    let o = saddle(&["sinf", "--input", "systems/riccati_branch.json"]);
    assert!(o.status.success());
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v["value"].as_f64().unwrap().abs() < 1e-12);
    assert_eq!(v["method"], "last_term");
    assert_eq!(v["N"], 70);
    assert!(v["error_estimate"].as_f64().unwrap() >= 0.0);

    let dir = tempfile::tempdir().unwrap();
    let flat = write_system(dir.path(), "flat.json", r#"{"kind": "riccati", "a": -1.7, "b": 0.0}"#);
    let o = saddle(&["sinf", "--input", &flat, "--method", "aitken"]);
    assert!(o.status.success());
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["value"].as_f64(), Some(0.0));
    assert_eq!(v["method"], "aitken");
}

#[test]
fn sinf_rejects_small_orders() {
    let o = saddle(&["sinf", "--input", "systems/riccati_generic.json", "--order", "9"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("N too small"));
}

#[test]
fn scan_reproduces_golden_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = dir.path().join("golden_scan");
    let o = saddle(&["scan", "--grid", "64x64", "--order", "70", "--output", prefix.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    for ext in [".csv", ".pgm", ".contours.csv"] {
        let got = fs::read(dir.path().join(format!("golden_scan{ext}"))).unwrap();
        let want = fs::read(fixture(&format!("golden_scan{ext}"))).unwrap();
        assert!(got == want, "{ext} differs from the fixture");
    }
}

#[test]
fn scan_bytes_do_not_depend_on_workers() {
    let dir = tempfile::tempdir().unwrap();
    let run = |workers: &str, name: &str| {
        let prefix = dir.path().join(name);
        let o = saddle(&[
            "scan", "--grid", "31x27", "--a-range", "-4.5:0.5", "--b-range", "-1:1.5", "--workers", workers, "--output",
            prefix.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        [".csv", ".pgm", ".contours.csv"].map(|ext| fs::read(dir.path().join(format!("{name}{ext}"))).unwrap())
    };
    assert_eq!(run("1", "one"), run("4", "four"));
    assert_eq!(run("1", "one"), run("1", "again"));
}

#[test]
fn scan_edge_cases() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = dir.path().join("tiny");
    let o = saddle(&["scan", "--grid", "2x2", "--output", prefix.to_str().unwrap()]);
    assert!(o.status.success());
    let csv = fs::read_to_string(dir.path().join("tiny.csv")).unwrap();
    assert_eq!(table(&csv).len(), 4);
    let contours = fs::read_to_string(dir.path().join("tiny.contours.csv")).unwrap();
    assert!(table(&contours).is_empty());

    let o = saddle(&["scan", "--a-range", "0:-6", "--output", prefix.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let o = saddle(&["scan", "--grid", "12by3", "--output", prefix.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn normalize_writes_reparseable_normal_form() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("normal.json");
    let o = saddle(&["normalize", "--input", "systems/riccati_deep.json", "--output", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(&out).unwrap();
    let (sys, rec) = parse_document(&text).unwrap();
    let System::Normalized(norm) = sys else { panic!("expected a normalized system") };
    assert!((norm.a() - 2.8).abs() < 1e-12);
    let rec = rec.unwrap();
    assert_eq!(rec.m, 6);
    assert_eq!(rec.q[0], 1.0);

    let o = saddle(&["normalize", "--input", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));

    let o = saddle(&["expand", "--input", out.to_str().unwrap(), "--order", "40"]);
    assert!(o.status.success(), "{}", stderr(&o));
}

#[test]
fn borel_on_euler_recovers_the_kernel() {
    let o = saddle(&["borel", "--input", "systems/euler.json", "--order", "60"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let rows = table(&text);
    assert_eq!(rows.len(), 60);
    for (n, row) in rows.iter().enumerate() {
        let phi: f64 = row[1].parse().unwrap();
        let z: f64 = row[2].parse().unwrap();
        assert!((phi - if n % 2 == 0 { 1.0 } else { -1.0 }).abs() < 1e-14);
        assert!((z - if n == 0 { 1.0 } else { 0.0 }).abs() < 1e-12, "Z_{n} = {z}");
    }
    let residual: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("# max_residual="))
        .unwrap()
        .parse()
        .unwrap();
    assert!(residual < 1e-10);
}

#[test]
fn borel_json_with_pade_sum() {
    let o = saddle(&[
        "borel", "--input", "systems/euler.json", "--order", "42", "--x", "0.1", "--pade-order", "20", "--format", "json",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let sum = v["meta"]["borel_sum"].as_f64().unwrap();
    assert!((sum - 0.0915633).abs() < 1e-6, "{sum}");
    assert_eq!(v["residuals"].as_array().unwrap().len(), 10);
}

#[test]
fn verify_passes() {
    let o = saddle(&["verify"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("lowerbound1: 0 violations / 100000"));
}

#[test]
fn commands_are_idempotent() {
    for args in [
        &["expand", "--input", "systems/mixed.json", "--order", "50"][..],
        &["sinf", "--input", "systems/riccati_generic.json", "--order", "150"][..],
        &["normalize", "--input", "systems/mixed.json", "--order", "30"][..],
        &["borel", "--input", "systems/riccati_generic.json", "--normal-form"][..],
        &["verify", "--trials", "1000"][..],
    ] {
        let (a, b) = (saddle(args), saddle(args));
        assert!(a.status.success(), "{args:?}: {}", stderr(&a));
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}
