use std::path::Path;
use std::process::{Command, Output};

use loewner_core::mminus::{shear_field, SHARP_CONSTANT};
use loewner_core::{MultiIndex, PowerSeriesMap2};
use num_complex::Complex64;
use tempfile::TempDir;

fn loewner(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_loewner"))
        .args(args)
        .output()
        .expect("spawn loewner")
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_owned()
}

fn phi_with_cubic_noise() -> PowerSeriesMap2 {
    let c = |re: f64, im: f64| Complex64::new(re, im);
    PowerSeriesMap2::from_terms(
        4,
        [
            (MultiIndex::new(1, 0), c(1.0, 0.0)),
            (MultiIndex::new(0, 2), c(SHARP_CONSTANT, 0.0)),
            (MultiIndex::new(2, 1), c(0.3, -0.2)),
            (MultiIndex::new(0, 3), c(-0.1, 0.4)),
        ],
        [
            (MultiIndex::new(0, 1), c(1.0, 0.0)),
            (MultiIndex::new(1, 2), c(0.7, 0.0)),
        ],
    )
    .unwrap()
}

#[test]
fn shear_strips_noise_and_is_idempotent() {
    let dir = TempDir::new().unwrap();
    let input = write(dir.path(), "noisy.json", &phi_with_cubic_noise().to_json());
    let once = dir.path().join("once.json");
    let out = loewner(&["shear", "--in", &input, "--out", once.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let sheared = PowerSeriesMap2::from_json(&std::fs::read_to_string(&once).unwrap()).unwrap();
    let expected = loewner_core::analysis::phi_map(Complex64::new(SHARP_CONSTANT, 0.0), 4).unwrap();
    assert_eq!(sheared.max_coeff_diff(&expected), 0.0);

    let twice = loewner(&["shear", "--in", once.to_str().unwrap()]);
    assert_eq!(twice.status.code(), Some(0));
    assert_eq!(twice.stdout, std::fs::read(&once).unwrap());
}

#[test]
fn check_mminus_exit_codes() {
    let dir = TempDir::new().unwrap();
    let field = shear_field(Complex64::new(SHARP_CONSTANT, 0.0), 2).unwrap();
    let input = write(dir.path(), "h_phi.json", &field.to_json());
    let ok = loewner(&["check-mminus", "--in", &input, "--samples", "20000"]);
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stdout));
    let report: serde_json::Value = serde_json::from_slice(&ok.stdout).unwrap();
    assert_eq!(report["report"]["verdict"], "accept");
    assert_eq!(report["config"]["sampling"]["random_samples"], 20000);

    let bad = loewner(&["check-mminus", "--a", "2.7", "0", "--samples", "20000"]);
    assert_eq!(bad.status.code(), Some(1));
    let report: serde_json::Value = serde_json::from_slice(&bad.stdout).unwrap();
    assert_eq!(report["report"]["verdict"], "reject");
    assert!(report["report"]["max_defect"].as_f64().unwrap() > 1e-3);
}

#[test]
fn identical_arguments_give_identical_output() {
    let args = [
        "check-mminus",
        "--a",
        "2.65",
        "0.1",
        "--seed",
        "11",
        "--samples",
        "5000",
    ];
    let first = loewner(&args);
    let second = loewner(&args);
    assert_eq!(first.status.code(), second.status.code());
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn reproduce_succeeds() {
    let out = loewner(&["reproduce"]);
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["report"]["all_passed"], true);
}

#[test]
fn bound_and_flow_report_values() {
    let out = loewner(&["bound"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((v["bound"]["value"].as_f64().unwrap() - SHARP_CONSTANT).abs() < 1e-9);

    let out = loewner(&["flow", "--a", "2.598076211353316", "0", "--s", "0", "--t", "20"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["flow"]["within_envelope"], true);
}

#[test]
fn evolve_point_matches_closed_form() {
    let out = loewner(&[
        "evolve", "--a", "1", "0", "--s", "0", "--t", "1", "--z", "0.2", "0", "0.5", "0",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let e = (-1f64).exp();
    let w1 = v["transition"]["value"][0][0].as_f64().unwrap();
    assert!((w1 - (0.2 * e + e * (1.0 - e) * 0.25)).abs() < 1e-9);
}

#[test]
fn malformed_input_and_unknown_flags_are_usage_errors() {
    let dir = TempDir::new().unwrap();
    let broken = write(dir.path(), "broken.json", "{\"trunc_degree\": 3, \"component1\": [");
    assert_eq!(loewner(&["shear", "--in", &broken]).status.code(), Some(2));
    let wrong = write(
        dir.path(),
        "wrong.json",
        "{\"trunc_degree\": 2, \"component1\": [], \"extra\": 1}",
    );
    assert_eq!(loewner(&["check-mminus", "--in", &wrong]).status.code(), Some(2));
    assert_eq!(loewner(&["bound", "--frobnicate"]).status.code(), Some(2));
    assert_eq!(loewner(&["check-mminus"]).status.code(), Some(2));
    assert_eq!(
        loewner(&["shear", "--in", "/nonexistent/h.json"]).status.code(),
        Some(2)
    );
}

#[test]
fn plot_emits_csv() {
    let out = loewner(&["plot", "--kind", "envelope", "--s", "0", "--t", "2", "--step", "0.5"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,envelope,scaled_envelope"));
    assert_eq!(lines.count(), 5);
}
