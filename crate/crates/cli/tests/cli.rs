use std::path::PathBuf;
use std::process::Command;

use realcert_cli::{run_with, EXIT_NEGATIVE, EXIT_OK, EXIT_USAGE};

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn run(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run_with(args.iter().map(|s| s.to_string()), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let (code, _, err) = run(&["validate", "--system", &fixture("bivar.sys"), "--frobnicate"]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("Usage"), "{err}");
    let (code, _, _) = run(&["no-such-command"]);
    assert_eq!(code, EXIT_USAGE);
}

#[test]
fn missing_file_is_an_input_error() {
    let (code, _, err) = run(&["check-cert", "--cert", "/nonexistent.cert", "--system", &fixture("cubic.sys")]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("nonexistent"), "{err}");
}

#[test]
fn help_exits_zero() {
    let (code, out, _) = run(&["--help"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("a-validate"));
}

#[test]
fn default_seed_is_printed() {
    let (code, out, _) = run(&["find", "--system", &fixture("bivar.sys"), "--seeds", "100", "--box=-2,2"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.starts_with("seed 42 (default)"), "{out}");
    assert_eq!(out.lines().filter(|l| !l.starts_with('#') && !l.starts_with("seed")).count(), 6);
}

#[test]
fn certify_and_check_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_string_lossy().into_owned();
    let (code, out, err) = run(&[
        "certify",
        "--system",
        &fixture("cubic.sys"),
        "--poly",
        "x - 1.2599210498948732",
        "--out",
        &d,
    ]);
    assert_eq!(code, EXIT_OK, "{out}{err}");
    assert!(out.contains("certified alpha=2"), "{out}");
    let cert = dir.path().join("certificate-000.cert").to_string_lossy().into_owned();
    let (code, out, _) = run(&["check-cert", "--cert", &cert, "--system", &fixture("cubic.sys")]);
    assert_eq!(code, EXIT_OK, "{out}");
}

#[test]
fn tampered_certificate_is_invalid() {
    let text = std::fs::read_to_string(fixture("ex32.cert")).unwrap();
    let bad = text.replace("gram: 4\n", "gram: 3\n");
    assert_ne!(text, bad);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.cert");
    std::fs::write(&path, bad).unwrap();
    let (code, out, _) = run(&["check-cert", "--cert", &path.to_string_lossy(), "--system", &fixture("cubic.sys")]);
    assert_eq!(code, EXIT_NEGATIVE);
    assert!(out.contains("invalid"));
}

#[test]
fn interpolate_prints_the_basis() {
    let (code, out, _) = run(&["interpolate", "--system", &fixture("bivar.sys"), "--points", &fixture("six.pts")]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("hilbert 1 3 5 6"), "{out}");
}

#[test]
fn binary_exit_codes() {
    let exe = env!("CARGO_BIN_EXE_realcert");
    let dir = tempfile::tempdir().unwrap();
    let status = Command::new(exe)
        .args(["validate", "--system", &fixture("bivar.sys"), "--points", &fixture("six.pts"), "--alpha-max", "2"])
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(EXIT_OK));
    let status = Command::new(exe).args(["validate", "--bogus"]).output().unwrap();
    assert_eq!(status.status.code(), Some(EXIT_USAGE));
}

#[test]
fn recorded_command_reproduces_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("a").to_string_lossy().into_owned();
    let args = [
        "validate",
        "--system",
        &fixture("bivar.sys"),
        "--seeds",
        "300",
        "--box=-2,2",
        "--seed",
        "5",
        "--alpha-max",
        "2",
        "--out",
        &first,
    ];
    let (code, _, _) = run(&args);
    assert_eq!(code, EXIT_OK);
    let report = std::fs::read_to_string(dir.path().join("a/report.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&report).unwrap();
    let mut again: Vec<String> = v["command"]
        .as_array()
        .unwrap()
        .iter()
        .map(|s| s.as_str().unwrap().to_string())
        .collect();
    assert!(!again.iter().any(|a| a == "--out"));
    again.push("--out".into());
    again.push(dir.path().join("b").to_string_lossy().into_owned());
    let refs: Vec<&str> = again.iter().map(String::as_str).collect();
    let (code, _, _) = run(&refs);
    assert_eq!(code, EXIT_OK);
    let second = std::fs::read_to_string(dir.path().join("b/report.json")).unwrap();
    assert_eq!(report, second);
}
