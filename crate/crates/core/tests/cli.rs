//! The `ntn-lab` binary end to end.

use std::path::Path;
use std::process::{Command, Output};

use sha2::{Digest, Sha256};

fn ntn_lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ntn-lab"))
        .args(args)
        .env_remove("NTN_LAB_BUILTIN_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn geometry_reproduces_leo600_rows() {
    let o = ntn_lab(&["geometry", "--scenario", "nbiot_leo600"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let row = |path: &str| {
        text.lines()
            .find(|l| l.starts_with(&format!("nbiot_leo600,{path},")))
            .unwrap_or_else(|| panic!("no {path} row in\n{text}"))
            .split(',')
            .map(str::to_string)
            .collect::<Vec<_>>()
    };
    let service = row("service");
    let d: f64 = service[4].parse().unwrap();
    let ms: f64 = service[5].parse().unwrap();
    assert!((d - 1932.25).abs() / 1932.25 < 1e-3 && (ms - 6.44).abs() < 0.01);
    let feeder = row("feeder");
    let d: f64 = feeder[4].parse().unwrap();
    assert!((d - 2329.03).abs() / 2329.03 < 1e-3);
}

#[test]
fn feasibility_prints_a_json_report() {
    let o = ntn_lab(&["feasibility", "--scenario", "embb_geo"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let checks = v["runs"][0]["result"]["checks"].as_array().unwrap();
    let verdict = |name: &str| {
        checks
            .iter()
            .find(|c| c["name"] == name)
            .map(|c| c["verdict"].as_str().unwrap().to_string())
            .unwrap()
    };
    assert_eq!(verdict("ra_rar_window"), "FAIL");
    assert_eq!(verdict("harq_processes"), "FAIL");
}

#[test]
fn exit_codes() {
    let unknown = ntn_lab(&["teleport"]);
    assert_eq!(unknown.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&unknown.stderr).contains("Usage"));
    assert_eq!(
        ntn_lab(&["geometry", "--frobnicate"]).status.code(),
        Some(2)
    );
    assert_eq!(
        ntn_lab(&["simulate-harq", "--scenario", "embb_geo"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        ntn_lab(&["feasibility", "--sweep", "separation=abc"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        ntn_lab(&["geometry", "--scenario", "missing/dir/x.json"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        ntn_lab(&["waveform", "--seed", "1", "--symbols", "20"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(ntn_lab(&["--help"]).status.code(), Some(0));
}

#[test]
fn manifest_hashes_every_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ra");
    let o = ntn_lab(&[
        "simulate-ra",
        "--scenario",
        "nbiot_leo600",
        "--seed",
        "4",
        "--sweep",
        "ues=1,8",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let manifest: serde_json::Value =
        serde_json::from_slice(&std::fs::read(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 4);
    assert_eq!(manifest["scenarios"][0]["name"], "nbiot_leo600");
    let seeds: Vec<u64> = manifest["runs"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["seed"].as_u64().unwrap())
        .collect();
    assert_eq!(seeds, [4, 5]);
    let artifacts = manifest["artifacts"].as_array().unwrap();
    assert_eq!(artifacts.len(), 5);
    for a in artifacts {
        let bytes = std::fs::read(out.join(a["path"].as_str().unwrap())).unwrap();
        assert_eq!(
            a["sha256"].as_str().unwrap(),
            hex::encode(Sha256::digest(&bytes))
        );
    }
    assert!(out.join("nbiot_leo600_ues8_events.log").is_file());
    // No temporary files are left behind.
    assert!(std::fs::read_dir(&out).unwrap().all(|e| !e
        .unwrap()
        .file_name()
        .to_string_lossy()
        .ends_with(".tmp")));
}

#[test]
fn builtin_dir_override() {
    let dir = tempfile::tempdir().unwrap();
    let mut s = ntn_lab::scenario::nbiot_leo600();
    s.h_sat_km = 800.0;
    std::fs::write(dir.path().join("nbiot_leo600.json"), s.to_json()).unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_ntn-lab"))
        .args(["geometry", "--scenario", "nbiot_leo600"])
        .env("NTN_LAB_BUILTIN_DIR", dir.path())
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(stdout(&o).contains("nbiot_leo600,service,800,"));
    let missing = Command::new(env!("CARGO_BIN_EXE_ntn-lab"))
        .args(["geometry", "--scenario", "embb_geo"])
        .env("NTN_LAB_BUILTIN_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn scenario_file_path() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("custom.json");
    let mut s = ntn_lab::scenario::embb_geo();
    s.name = "custom".into();
    std::fs::write(&path, s.to_json()).unwrap();
    let o = ntn_lab(&[
        "harq",
        "--scenario",
        path.to_str().unwrap(),
        "--processing",
        "5",
    ]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(
        text.lines().nth(1).unwrap().starts_with("custom,"),
        "{text}"
    );
    assert!(text.contains(",555,10,"), "{text}");
    std::fs::write(&path, "{ not json").unwrap();
    assert_eq!(
        ntn_lab(&["harq", "--scenario", path.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn waveform_exports_plot_data() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("wf");
    let o = ntn_lab(&[
        "waveform",
        "--seed",
        "2",
        "--symbols",
        "100",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in [
        "waveform.csv",
        "waveform_psd_ofdm.csv",
        "waveform_psd_fofdm_twta.csv",
        "waveform_ccdf_fofdm.csv",
    ] {
        assert!(Path::new(&out.join(f)).is_file(), "missing {f}");
    }
    let psd = std::fs::read_to_string(out.join("waveform_psd_ofdm.csv")).unwrap();
    assert!(psd.starts_with("freq_norm,psd_db\n"));
}
