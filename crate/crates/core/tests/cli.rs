//! End-to-end checks of the command-line binary: exit codes, output files,
//! scenario parsing, and reproducible checksums.

use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_thermoelastic"))
}

fn non_comment_lines(path: &Path) -> String {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn simulate_writes_energy_curve() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["simulate", "--model", "weak", "--bc", "DD", "--n", "16"])
        .args(["--T", "2", "--dt", "0.1"])
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("seed: 42"), "seed must be echoed: {stdout}");
    let csv = dir.path().join("simulate_weak_DD_n16_energy.csv");
    let body = non_comment_lines(&csv);
    let mut lines = body.lines();
    assert_eq!(lines.next().unwrap(), "t,E_modal,E_grid");
    assert_eq!(lines.count(), 21);
    assert!(dir.path().join("simulate_weak_DD_n16_report.json").exists());
}

#[test]
fn invalid_gamma_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["spectrum", "--gamma=-1", "--n", "8"])
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("gamma"), "stderr should name the field: {err}");
}

#[test]
fn scenario_file_provides_defaults_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = dir.path().join("s.json");
    std::fs::write(
        &scenario,
        r#"{"name":"filecase","model":"weak","bc":"DD","n":12,"gamma":0.05,"task":"Simulate","T":1,"dt":0.1}"#,
    )
    .unwrap();
    let out = bin()
        .arg("simulate")
        .arg("--scenario")
        .arg(&scenario)
        .args(["--n", "10"])
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    // The flag overrides the file's n; the file's name is kept.
    let report = std::fs::read_to_string(dir.path().join("filecase_report.json")).unwrap();
    assert!(report.contains("\"n\": 10"), "{report}");
}

#[test]
fn malformed_scenario_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = dir.path().join("bad.json");
    std::fs::write(&scenario, "{not json").unwrap();
    let out = bin()
        .arg("simulate")
        .arg("--scenario")
        .arg(&scenario)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn out_dir_env_override() {
    let dir = tempfile::tempdir().unwrap();
    let env_dir = dir.path().join("env_target");
    let out = bin()
        .args(["spectrum", "--model", "weak", "--n", "4"])
        .arg("--out")
        .arg(dir.path())
        .env("THERMO_OUT_DIR", &env_dir)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(env_dir.join("spectrum_weak_DD_n4_eigenvalues.csv").exists());
}

#[test]
fn repeated_runs_have_identical_payloads() {
    let d1 = tempfile::tempdir().unwrap();
    let d2 = tempfile::tempdir().unwrap();
    for d in [&d1, &d2] {
        let out = bin()
            .args(["roots", "--model", "weak", "--gamma", "0.05", "--bc", "DD"])
            .args(["--k-lo", "5", "--k-hi", "8"])
            .arg("--out")
            .arg(d.path())
            .output()
            .unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let name = "roots_weak_DD_n100_roots.csv";
    assert_eq!(
        non_comment_lines(&d1.path().join(name)),
        non_comment_lines(&d2.path().join(name))
    );
}

#[test]
fn sweep_disc_reports_both_cases() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["sweep", "--disc", "--model", "weak", "--n", "12"])
        .args(["--T", "1", "--dt", "0.1"])
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let body = non_comment_lines(&dir.path().join("sweep_disc_weak_DD_n12_sweep.csv"));
    assert!(body.lines().any(|l| l.starts_with("sine,")));
    assert!(body.lines().any(|l| l.starts_with("disc,")));
}

#[test]
fn incompatible_initial_data_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = dir.path().join("s.json");
    std::fs::write(
        &scenario,
        r#"{"task":"Simulate","bc":"DD","n":8,"T":1,
            "initial":{"v0":{"type":"cosine_mode","j":1}}}"#,
    )
    .unwrap();
    let out = bin()
        .arg("simulate")
        .arg("--scenario")
        .arg(&scenario)
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}
