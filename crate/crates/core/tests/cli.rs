use std::path::Path;
use std::process::{Command, Output};

fn mzscatter(dir: &Path, config: &str, args: &[&str]) -> Output {
    let path = dir.join("run.cfg");
    std::fs::write(&path, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_mzscatter")).args(args).arg("--config").arg(&path).output().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn data_rows(text: &str) -> Vec<Vec<String>> {
    text.lines().filter(|l| !l.starts_with('#')).skip(1).map(|l| l.split(',').map(String::from).collect()).collect()
}

#[test]
fn fringe_to_stdout_with_points_override() {
    let dir = tempfile::tempdir().unwrap();
    let out = mzscatter(dir.path(), "", &["fringe", "--points", "5"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!(text.contains("# command = fringe\n"));
    assert!(text.contains("# points = 5\n"));
    assert!(text.contains("\nPhi,P_scl,P_quantum_exact,P_quantum_MZ,P_quantum_direct\n"));
    let rows = data_rows(&text);
    assert_eq!(rows.len(), 5);
    for row in &rows {
        assert_eq!(row.len(), 5);
        let phi: f64 = row[0].parse().unwrap();
        let p_scl: f64 = row[1].parse().unwrap();
        assert!((p_scl - (phi / 2.0).sin().powi(2)).abs() < 1e-12);
        assert_eq!(row[0].split('e').next().unwrap().replace(['-', '.'], "").len(), 17);
    }
}

#[test]
fn metadata_records_the_resolved_config() {
    let dir = tempfile::tempdir().unwrap();
    let out = mzscatter(dir.path(), "v_x = 0.02\n", &["fringe", "--points", "3", "--set", "L=0.25"]);
    let text = stdout(&out);
    assert!(text.contains("# v_x = 2.0000000000000000e-2\n"));
    assert!(text.contains("# L = 2.5000000000000000e-1\n"));
    assert!(text.contains("# mass = 3.8200000000000001e-26\n"));
    assert!(text.contains("# l = 1.0000000000000001e-5\n"));
}

#[test]
fn set_swaps_alternative_keys() {
    let dir = tempfile::tempdir().unwrap();
    let out = mzscatter(dir.path(), "v_x = 0.02\n", &["fringe", "--points", "3", "--set", "k_x=3e6"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("# speed_given_as = k_x\n"));
}

#[test]
fn writes_to_out_file() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("fringe.csv");
    let out = mzscatter(dir.path(), "", &["fringe", "--points", "3", "--out", target.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    assert_eq!(data_rows(&std::fs::read_to_string(target).unwrap()).len(), 3);
}

#[test]
fn config_errors_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    for bad in ["v_x = 0.005\nk_x = 1e6\n", "l = -1\n", "nonsense\n", "v_x = fast\n"] {
        let out = mzscatter(dir.path(), bad, &["fringe"]);
        assert_eq!(out.status.code(), Some(2), "{bad}");
        assert!(!out.stderr.is_empty());
    }
    let out = mzscatter(dir.path(), "", &["fringe", "--set", "bogus"]);
    assert_eq!(out.status.code(), Some(2));
    let missing = Command::new(env!("CARGO_BIN_EXE_mzscatter")).args(["fringe", "--config", "/nonexistent.cfg"]).output().unwrap();
    assert_eq!(missing.status.code(), Some(2));
    let line = mzscatter(dir.path(), "# header\nl = 1e-5\nwat = 1\n", &["fringe"]);
    assert!(String::from_utf8_lossy(&line.stderr).contains("line 3"));
}

#[test]
fn physics_errors_exit_with_3() {
    let dir = tempfile::tempdir().unwrap();
    let out = mzscatter(dir.path(), "delta = -1e9\n", &["doppler"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn closed_channel_fringe_is_flagged_not_fatal() {
    let dir = tempfile::tempdir().unwrap();
    let out = mzscatter(dir.path(), "delta = -1e9\npoints = 3\n", &["fringe"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("# closed_channel = true\n"));
}

#[test]
fn doppler_and_epsilon_scan() {
    let dir = tempfile::tempdir().unwrap();
    let out = mzscatter(dir.path(), "", &["doppler"]);
    assert!(out.status.success());
    let rows = data_rows(&stdout(&out));
    assert_eq!(rows.len(), 3);
    let shifts: Vec<f64> = rows.iter().map(|r| r[1].parse().unwrap()).collect();
    assert!(shifts.iter().all(|s| (s - shifts[1]).abs() < 0.01 * shifts[1].abs()));

    let out = mzscatter(dir.path(), "eps_points = 11\n", &["epsilon-scan"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("# crossings = 1\n"));
    assert!(text.contains("\nepsilon,abs_A2,abs_A3,delta_phi\n"));
    assert_eq!(data_rows(&text).len(), 11);
}

#[test]
fn shift_scan_columns() {
    let dir = tempfile::tempdir().unwrap();
    let out = mzscatter(dir.path(), "kxl_min = 2\nkxl_max = 200\nkxl_points = 3\n", &["shift-scan"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("\nkx_l,delta_phi_direct,delta_phi_exact\n"));
    assert!(text.contains("# flagged_low_velocity = 2.0000000000000000e0"));
    assert_eq!(data_rows(&text).len(), 3);
}
