use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const POLY2: &str = r#"{"kind":"poly_no_const","params":{"degree":2}}"#;

fn kc(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kc"))
        .current_dir(dir)
        .env_remove("KC_SEED")
        .args(args)
        .output()
        .unwrap()
}

fn write_sample(dir: &Path) {
    let mut s = String::from("x1,y\n");
    for i in 0..40 {
        let x = -1.0 + 2.0 * i as f64 / 39.0;
        s.push_str(&format!("{x},{}\n", x * x));
    }
    fs::write(dir.join("sample.csv"), s).unwrap();
}

#[test]
fn unknown_subcommand_is_usage_error() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(kc(d.path(), &["frobnicate"]).status.code(), Some(2));
    assert_eq!(kc(d.path(), &["--help"]).status.code(), Some(0));
}

#[test]
fn missing_input_writes_nothing() {
    let d = tempfile::tempdir().unwrap();
    let out = kc(d.path(), &["compress", "--algo", "herd", "--kernel", POLY2, "--input", "nope.csv", "--out", "c.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!d.path().join("c.json").exists());
    assert!(!d.path().join("manifest.json").exists());
}

#[test]
fn compress_then_regress() {
    let d = tempfile::tempdir().unwrap();
    write_sample(d.path());
    let out = kc(d.path(), &["compress", "--algo", "fw", "--T", "6", "--kernel", POLY2, "--input", "sample.csv", "--trace", "trace.csv"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let c: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.path().join("coreset.json")).unwrap()).unwrap();
    let w: f64 = c["weights"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).sum();
    assert!((w - 1.0).abs() < 1e-12);
    assert!(d.path().join("trace.csv").exists());

    let out = kc(
        d.path(),
        &["krr", "--coreset", "coreset.json", "--input", "sample.csv", "--lambda", "0.01", "--mode", "min", "--predict", "sample.csv"],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let preds = fs::read_to_string(d.path().join("predictions.csv")).unwrap();
    assert_eq!(preds.lines().count(), 41);
}

#[test]
fn diagnose_delta_pair() {
    let d = tempfile::tempdir().unwrap();
    fs::write(d.path().join("pts.csv"), "x1\n0\n1\n").unwrap();
    let out = kc(d.path(), &["diagnose", "--kernel", r#"{"kind":"delta","params":{}}"#, "--input", "pts.csv"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let r: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.path().join("spectral_report.json")).unwrap()).unwrap();
    assert_eq!(r["bound_variant"], "KMinus");
    assert!((r["diam_lower"].as_f64().unwrap() - 0.5 * 0.5f64.sqrt()).abs() < 1e-10);
}

#[test]
fn numerical_failure_exit_code() {
    let d = tempfile::tempdir().unwrap();
    fs::write(d.path().join("pts.csv"), "x1\n0\n0\n").unwrap();
    let out = kc(d.path(), &["diagnose", "--kernel", r#"{"kind":"linear","params":{}}"#, "--input", "pts.csv", "--variant", "kplus"]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn repro_outputs_are_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for (dir, threads) in [(&a, "4"), (&b, "1")] {
        let out = kc(dir.path(), &["--threads", threads, "repro", "--case", "figure3", "--case", "mmd", "--out-dir", "r"]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    }
    for f in ["figure3.json", "figure3.csv", "mmd.json", "summary.json"] {
        let x = fs::read(a.path().join("r").join(f)).unwrap();
        let y = fs::read(b.path().join("r").join(f)).unwrap();
        assert_eq!(x, y, "{f}");
    }
}
