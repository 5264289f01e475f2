use std::process::Command;

fn emimo() -> Command {
    Command::new(env!("CARGO_BIN_EXE_emimo"))
}

#[test]
fn toy_run_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("toy.csv");
    let status = emimo()
        .args(["toy", "--n-trials", "2000", "--snr-grid", "20,25", "--output"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let csv = std::fs::read_to_string(&out).unwrap();
    assert_eq!(csv.lines().count(), 3);
    assert!(dir.path().join("toy.manifest.json").exists());
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"experiment": "outage", "unknown_field": true}"#).unwrap();
    let out = emimo().arg("outage").arg("--config").arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 1"));

    let out = emimo().args(["outage", "--snr-grid", "10,5", "--print-config"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));

    let out = emimo().args(["wer", "--scheme", "rot_27", "--print-config"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_alist_is_a_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = emimo()
        .args(["wer", "--n-trials", "1", "--snr-grid", "10", "--alist"])
        .arg(dir.path().join("absent.alist"))
        .arg("--output")
        .arg(dir.path().join("w.csv"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn config_file_round_trips_through_print_config() {
    let dir = tempfile::tempdir().unwrap();
    let out = emimo().args(["outage", "--scheme", "golden", "--seed", "7", "--print-config"]).output().unwrap();
    assert!(out.status.success());
    let path = dir.path().join("cfg.json");
    std::fs::write(&path, &out.stdout).unwrap();
    let again = emimo().arg("outage").arg("--config").arg(&path).arg("--print-config").output().unwrap();
    assert!(again.status.success());
    assert_eq!(again.stdout, out.stdout);
    let wrong = emimo().arg("wer").arg("--config").arg(&path).arg("--print-config").output().unwrap();
    assert_eq!(wrong.status.code(), Some(2));
}
