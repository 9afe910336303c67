use std::path::Path;
use std::process::{Command, Output};

fn su11sim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_su11sim"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(su11sim(&["--help"]).status.code(), Some(0));
    assert_eq!(su11sim(&["--version"]).status.code(), Some(0));
}

#[test]
fn bad_flags_exit_one() {
    assert_eq!(su11sim(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(su11sim(&["--format", "png", "fringe"]).status.code(), Some(1));
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let r = su11sim(&["--preset", "fig9", "--out", path(&out), "fringe"]);
    assert_eq!(r.status.code(), Some(1));
    assert!(!out.exists());
}

#[test]
fn malformed_config_exits_one_and_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "[interferometer]\ngain1 = 3.0\ngian2 = 3.0\n").unwrap();
    let out = dir.path().join("out");
    let r = su11sim(&["--config", path(&cfg), "--out", path(&out), "fringe"]);
    assert_eq!(r.status.code(), Some(1));
    let err = String::from_utf8_lossy(&r.stderr);
    assert!(err.contains("gian2"), "{err}");
    assert!(!out.exists());

    std::fs::write(&cfg, "[interferometer]\ngain1 = 0.5\n").unwrap();
    let r = su11sim(&["--config", path(&cfg), "--out", path(&out), "fringe"]);
    assert_eq!(r.status.code(), Some(1));
    assert!(!out.exists());
}

#[test]
fn config_file_round_trip_and_stamps() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(
        &cfg,
        "[interferometer]\ntopology = \"sui\"\ngain1 = 2.0\ngain2 = 2.0\n\n[fringe]\npoints = 8\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    let r = su11sim(&["--config", path(&cfg), "--seed", "7", "--out", path(&out), "--format", "svg", "fringe"]);
    assert_eq!(r.status.code(), Some(0), "{}", String::from_utf8_lossy(&r.stderr));
    let csv = std::fs::read_to_string(out.join("fringe.csv")).unwrap();
    assert!(csv.contains("# seed: 7"));
    assert!(csv.contains("# config_hash: "));
    assert_eq!(csv.lines().filter(|l| !l.starts_with('#')).count(), 9);
    assert!(out.join("fringe.svg").exists());
    assert_eq!(
        std::fs::read_to_string(out.join("config.toml")).unwrap(),
        std::fs::read_to_string(&cfg).unwrap()
    );
}

#[test]
fn same_seed_gives_identical_tables() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let c = dir.path().join("c");
    for (out, seed) in [(&a, "3"), (&b, "3"), (&c, "4")] {
        let r = su11sim(&["--preset", "fig2", "--seed", seed, "--out", path(out), "noise-spectrum"]);
        assert_eq!(r.status.code(), Some(0));
    }
    let read = |d: &Path| std::fs::read(d.join("noise_spectrum.csv")).unwrap();
    assert_eq!(read(&a), read(&b));
    assert_ne!(read(&a), read(&c));
}

#[test]
fn oracle_truncation_exits_two_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let r = su11sim(&["--out", path(&out), "oracle-check", "--cutoff", "2"]);
    assert_eq!(r.status.code(), Some(2));
    let err = String::from_utf8_lossy(&r.stderr);
    assert!(err.contains("truncation") && err.contains("G="), "{err}");
    assert!(!out.exists());
}

#[test]
fn oracle_check_passes_at_default_cutoff() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let r = su11sim(&["--out", path(&out), "oracle-check", "--max-gain", "1.5", "--cutoff", "30"]);
    assert_eq!(r.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&r.stdout).contains("PASS"));
    assert!(out.join("oracle.csv").exists());
}

#[test]
fn unit_gain_sensitivity_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(
        &cfg,
        "[interferometer]\ngain1 = 1.0\ngain2 = 1.0\neta_internal = 1.0\neta_detection = 1.0\n\n[sensitivity]\npoints = 3\nseeds = 20\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    let r = su11sim(&["--config", path(&cfg), "--out", path(&out), "sensitivity"]);
    assert_eq!(r.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&r.stderr).contains("phase arm"));
    assert!(!out.exists());
}

#[test]
fn single_point_sweep_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "[sensitivity]\npoints = 1\nseeds = 20\n").unwrap();
    let out = dir.path().join("out");
    let r = su11sim(&["--config", path(&cfg), "--out", path(&out), "sensitivity"]);
    assert_eq!(r.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&r.stderr).contains("at least 3 points"));
    assert!(!out.exists());
}

#[test]
fn lock_failure_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "[lock]\nintegral_gain = 0.0\ndrift = 0.45\nsteps = 200\n").unwrap();
    let out = dir.path().join("out");
    let r = su11sim(&["--config", path(&cfg), "--out", path(&out), "lock"]);
    assert_eq!(r.status.code(), Some(2), "{}", String::from_utf8_lossy(&r.stderr));
    assert!(String::from_utf8_lossy(&r.stderr).contains("lock failure"));
    assert!(!out.exists());
}
