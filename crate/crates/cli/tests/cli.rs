use std::path::Path;
use std::process::{Command, Output};

fn anosov(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_anosov")).args(args).current_dir(dir).env("ANOSOV_THREADS", "2").output().unwrap()
}

#[test]
fn lists_the_catalog() {
    let dir = tempfile::tempdir().unwrap();
    let out = anosov(&["list-scenarios"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 6);
    assert!(text.lines().all(|l| l.contains('\t')));
}

#[test]
fn ball_csv_has_one_row_per_element() {
    let dir = tempfile::tempdir().unwrap();
    let out = anosov(&["ball", "--scenario", "schottky-so21", "--max-len", "3", "--out", "b.csv"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("b.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("word,length,mu_1,mu_2,mu_3"));
    // 1 + 4 + 12 + 36 elements
    assert_eq!(lines.count(), 53);
}

#[test]
fn exponent_report_is_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = anosov(&["exponent", "--scenario", "schottky-so21", "--max-len", "8"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    for key in ["value", "stderr", "window", "method", "form", "diagnostics"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert!(v["value"].as_f64().unwrap() > 0.0);
}

#[test]
fn verify_reports_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let args = |file: &'static str| {
        [
            "verify",
            "--scenario",
            "fuchsian-red-sl3",
            "--seed",
            "7",
            "--max-len",
            "9",
            "--count",
            "600",
            "--report",
            file,
        ]
    };
    let a = anosov(&args("r1.json"), dir.path());
    let b = anosov(&args("r2.json"), dir.path());
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(b.status.code(), Some(0));
    let r1 = std::fs::read(dir.path().join("r1.json")).unwrap();
    let r2 = std::fs::read(dir.path().join("r2.json")).unwrap();
    assert_eq!(r1, r2);
    let v: serde_json::Value = serde_json::from_slice(&r1).unwrap();
    assert!(v.get("runtime_s").is_none());
}

#[test]
fn usage_and_config_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(anosov(&["exponent", "--no-such-flag"], dir.path()).status.code(), Some(1));
    assert_eq!(anosov(&["exponent"], dir.path()).status.code(), Some(1));
    assert_eq!(anosov(&["exponent", "--scenario", "nope"], dir.path()).status.code(), Some(1));
    std::fs::write(dir.path().join("c.toml"), "scenario = \"schottky-so21\"\nfoo = 1\n").unwrap();
    let out = anosov(&["exponent", "--config", "c.toml"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("foo"));
}

#[test]
fn budget_overflow_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = anosov(&["ball", "--scenario", "schottky-so21", "--max-len", "12", "--budget", "1000"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn help_exits_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let out = anosov(&["--help"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("verify"));
}
