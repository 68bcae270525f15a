//! End-to-end tests of the binary: exit codes, file artifacts, output shape.

use std::path::Path;
use std::process::{Command, Output};

fn belltest(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_belltest"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn synthesize_writes_a_loadable_config() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("config.txt");
    let out = belltest(&["synthesize", "--tier", "per-m", "--output", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&path).unwrap();
    let rc = belltest::RegionConfig::from_text(&text).unwrap();
    assert_eq!(rc.tier(), belltest::Tier::PerM);
    // 16 m-lines follow the tier line
    assert_eq!(text.lines().filter(|l| l.starts_with("m ")).count(), 16);
}

#[test]
fn synthesize_shared_tier_exits_with_the_infeasible_code() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cert.txt");
    let out = belltest(&["synthesize", "--tier", "j-only", "--output", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4));
    let cert = std::fs::read_to_string(&path).unwrap();
    assert!(cert.contains("infeasible"));
    assert!(stdout(&out).contains("exhausted"));
}

#[test]
fn synthesize_rejects_unknown_tier_as_usage_error() {
    let out = belltest(&["synthesize", "--tier", "bogus", "--output", "/tmp/x.txt"]);
    assert_eq!(out.status.code(), Some(2));
}

fn write_valid_config(path: &Path) {
    let out = belltest(&["synthesize", "--output", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn verify_passes_on_a_valid_config() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("config.txt");
    write_valid_config(&path);
    let out = belltest(&[
        "verify",
        "--config",
        path.to_str().unwrap(),
        "--runs",
        "2000",
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!(text.contains("10 of 10 claims passed"), "got: {text}");
}

#[test]
fn verify_fails_on_a_corrupted_config() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("config.txt");
    write_valid_config(&path);
    // duplicate one supported cell into another block: normalization breaks
    let text = std::fs::read_to_string(&path).unwrap();
    let corrupted = text.replace("m 1 1   1,2   3,0   0,3   2,1", "m 1 1   1,2   3,0   0,3   0,1");
    assert_ne!(text, corrupted, "fixture must match the synthesized config");
    std::fs::write(&path, corrupted).unwrap();
    let out = belltest(&[
        "verify",
        "--config",
        path.to_str().unwrap(),
        "--runs",
        "1000",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("FAIL"));
}

#[test]
fn verify_missing_file_is_an_io_error() {
    let out = belltest(&["verify", "--config", "/nonexistent/config.txt"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn verify_unparseable_file_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("garbage.txt");
    std::fs::write(&path, "tier: per-m\nm 1 1 nonsense\n").unwrap();
    let out = belltest(&["verify", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn experiment_reports_correlations_and_zero_ber() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("records.csv");
    let out = belltest(&[
        "experiment",
        "--runs",
        "20000",
        "--seed",
        "5",
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!(text.contains("CHSH estimate"));
    assert!(text.contains("bit error rate 0"));
    let csv_text = std::fs::read_to_string(&csv).unwrap();
    assert!(csv_text.starts_with("run,m,u,v,a,b,x,y\n"));
    assert_eq!(csv_text.lines().count(), 20001);
}

#[test]
fn experiment_hide_m_gives_chance_level_ber() {
    let out = belltest(&[
        "experiment",
        "--runs",
        "10000",
        "--hide-m",
        "--structured",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let ber_line = text
        .lines()
        .find(|l| l.starts_with("bit_error_rate:"))
        .expect("structured output carries the rate");
    let ber: f64 = ber_line.split(':').nth(1).unwrap().trim().parse().unwrap();
    assert!((ber - 0.5).abs() < 0.02, "blind BER {ber}");
}

#[test]
fn experiment_rejects_zero_runs_and_bad_angles() {
    let out = belltest(&["experiment", "--runs", "0"]);
    assert_eq!(out.status.code(), Some(2));
    let out = belltest(&["experiment", "--runs", "10", "--angles", "0,90,45"]);
    assert_eq!(out.status.code(), Some(2));
    let out = belltest(&["experiment", "--runs", "10", "--angles", "0,90,45,xyz"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_arguments_exit_with_the_usage_code() {
    let out = belltest(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn deterministic_experiment_output() {
    let a = belltest(&["experiment", "--runs", "5000", "--seed", "123", "--structured"]);
    let b = belltest(&["experiment", "--runs", "5000", "--seed", "123", "--structured"]);
    assert_eq!(stdout(&a), stdout(&b));
}
