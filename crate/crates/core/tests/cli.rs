use std::path::Path;
use std::process::{Command, Output};

use ota_core::io::{parse_scan, read_scan};
use ota_core::Quantity;

fn ota(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ota")).args(args).output().unwrap()
}

fn synth(path: &Path, extra: &[&str]) {
    let mut args = vec!["synth", "--grid", "12x24", "--out", path.to_str().unwrap()];
    args.extend_from_slice(extra);
    let out = ota(&args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn check_accepts_generated_scan() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("scan.csv");
    synth(&path, &["--pattern", "dipole", "--eff", "0.5", "--power", "10", "--role", "transmit"]);
    let out = ota(&["check", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("ok: EIRP scan on 12x24 grid"));
}

#[test]
fn truncated_scan_names_first_missing_cell() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("scan.csv");
    synth(&path, &["--pattern", "isotropic", "--eff", "1", "--power", "0", "--role", "transmit"]);
    let text = std::fs::read_to_string(&path).unwrap();
    let kept: Vec<&str> = text.lines().collect();
    let truncated = kept[..kept.len() - 5].join("\n") + "\n";
    std::fs::write(&path, truncated).unwrap();

    for cmd in ["check", "trp"] {
        let out = ota(&[cmd, path.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(1), "{cmd}");
        let err = String::from_utf8_lossy(&out.stderr);
        assert!(err.contains("missing record"), "{err}");
        assert!(err.contains("ring 11"), "{err}");
    }
}

#[test]
fn wrong_quantity_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("rx.csv");
    synth(&path, &["--pattern", "dipole", "--eff", "0.5", "--power", "-90", "--role", "receive"]);
    let out = ota(&["trp", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn tis_writes_maps_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("rx.csv");
    let report = dir.path().join("rx.json");
    synth(&path, &["--pattern", "dipole", "--eff", "0.5", "--power", "-90", "--role", "receive"]);
    let out = ota(&["tis", path.to_str().unwrap(), "--maps", "--out", report.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let dr = std::fs::read_to_string(dir.path().join("rx_dr.csv")).unwrap();
    let uprime = std::fs::read_to_string(dir.path().join("rx_uprime.csv")).unwrap();
    assert!(dr.contains("# quantity: receive_directivity"));
    assert!(dr.contains("# unit: dBi"));
    assert!(uprime.contains("# quantity: receiving_intensity"));
    // map files are not scans
    assert!(parse_scan(&dr).is_err());

    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(report).unwrap()).unwrap();
    assert_eq!(json["quantity"], "tis");
    assert_eq!(json["grid"]["n_theta"], 12);
    assert!(json["receive_directivity_deviation"].as_f64().unwrap() < 1e-9);

    // the scan itself is untouched and still readable
    assert_eq!(read_scan(&path).unwrap().quantity(), Quantity::Eis);
}

#[test]
fn bad_arguments_exit_two() {
    assert_eq!(ota(&["synth", "--pattern", "horn"]).status.code(), Some(2));
    assert_eq!(ota(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(ota(&["--help"]).status.code(), Some(0));
}
