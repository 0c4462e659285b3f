//! End-to-end checks of the command line: layering of config sources, error
//! reporting, exit codes, and the on-disk shape of a run directory.

use std::fs;
use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_epigrowth"))
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("missing {name}: {e}"))
}

#[test]
fn flags_override_config_file_which_overrides_defaults() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.cfg");
    fs::write(&cfg, "N = 8\ndelta = 0.5\n# comment\nT = 0.01\n").unwrap();
    let out = tmp.path().join("out");
    let status = bin()
        .args(["simulate", "--config"])
        .arg(&cfg)
        .args(["--N", "4", "--dt", "0.001", "--sigma", "0"])
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let manifest = read(&out, "manifest.txt");
    assert!(manifest.contains("config.N = 4"), "flag must beat file:\n{manifest}");
    assert!(manifest.contains("config.delta = 0.5"), "file must beat default:\n{manifest}");
    assert!(manifest.contains("config.T = 0.01"));
    for name in ["diagnostics.csv", "final.spf1", "final.grd1", "final.pgm"] {
        assert!(out.join(name).exists(), "missing output {name}");
    }
}

#[test]
fn unknown_config_key_reports_its_line() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.cfg");
    fs::write(&cfg, "N = 4\nbogus = 1\n").unwrap();
    let output = bin()
        .args(["simulate", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(tmp.path().join("out"))
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
    let err = String::from_utf8_lossy(&output.stderr);
    assert!(err.contains("line 2"), "stderr: {err}");
    assert!(err.contains("bogus"), "stderr: {err}");
}

#[test]
fn out_of_range_parameter_is_named() {
    let tmp = tempfile::tempdir().unwrap();
    let output = bin()
        .args(["simulate", "--delta=-1", "--out"])
        .arg(tmp.path().join("out"))
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
    let err = String::from_utf8_lossy(&output.stderr);
    assert!(err.contains("delta"), "stderr: {err}");
}

#[test]
fn study_ladders_need_at_least_two_rungs() {
    let tmp = tempfile::tempdir().unwrap();
    let output = bin()
        .args(["decay", "--epsilons", "0.25", "--samples", "2", "--out"])
        .arg(tmp.path().join("out"))
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
}

#[test]
fn failed_trend_gate_exits_two() {
    // a reversed ladder makes the noise-gradient trend run the wrong way
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let output = bin()
        .args([
            "bound",
            "--epsilons",
            "0.0625,0.25",
            "--samples",
            "2",
            "--T",
            "0.02",
            "--dt",
            "0.002",
        ])
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2), "stderr: {}",
        String::from_utf8_lossy(&output.stderr));
    let summary = read(&out, "summary.txt");
    assert!(summary.contains("FAIL"), "summary:\n{summary}");
}

#[test]
fn moments_writes_the_alpha_table() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let status = bin()
        .args([
            "moments", "--N", "4", "--samples", "400", "--T", "0.1", "--eps", "0.3",
        ])
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let csv = read(&out, "moments.csv");
    let header = csv.lines().next().unwrap();
    assert_eq!(
        header,
        "profile_kind,epsilon,t,alpha,closed_form,mc_estimate,mc_stderr,n_samples"
    );
    assert!(csv.lines().count() > 4, "expected one row per alpha:\n{csv}");
}

#[test]
fn analyze_needs_no_sampling_and_succeeds() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let status = bin()
        .args(["analyze", "--epsilons", "0.25,0.125", "--t-eval", "0.5"])
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let csv = read(&out, "analyze.csv");
    assert!(csv.lines().count() == 3, "one row per rung:\n{csv}");
    assert!(read(&out, "manifest.txt").contains("subcommand = analyze"));
}

#[test]
fn help_and_bad_flags_use_conventional_exit_codes() {
    let ok = bin().arg("--help").output().unwrap();
    assert_eq!(ok.status.code(), Some(0));
    let bad = bin().args(["simulate", "--no-such-flag"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(1));
}
