use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn mfg(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mfg"))
        .args(args)
        .current_dir(cwd)
        .output()
        .unwrap()
}

fn write_config(dir: &Path, text: &str) -> String {
    let p = dir.join("run.ini");
    fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

fn error_line(out: &Output) -> serde_json::Value {
    let err = String::from_utf8_lossy(&out.stderr);
    let line = err.lines().last().unwrap();
    serde_json::from_str(line).unwrap()
}

const SHORT: &str = "[experiment]\nmodel = shock\nsolver = nplayer\n\n[solver]\nn_grid = 40\ndt = 1e-3\nt_final = 1\n";

#[test]
fn run_writes_csvs_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SHORT);
    let out = mfg(
        &["run", &cfg, "--out-dir", "res", "--snapshots", "0, 0.5, 1"],
        dir.path(),
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let summary: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(summary["status"], "ok");
    assert_eq!(summary["files"], 4);
    let first = fs::read_to_string(dir.path().join("res/nplayer_values_0000.csv")).unwrap();
    assert!(first.starts_with("t,zeta,u1,u2\n0.0000000000000000e0,0.0000000000000000e0,"));
    assert!(dir.path().join("res/nplayer_diagnostics.csv").exists());
}

#[test]
fn flags_override_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SHORT);
    let out = mfg(
        &[
            "run",
            &cfg,
            "--solver",
            "scalar",
            "--n-grid",
            "20",
            "--t-final",
            "0.5",
            "--out-dir",
            "s",
        ],
        dir.path(),
    );
    assert!(out.status.success());
    let text = fs::read_to_string(dir.path().join("s/scalar_values_0001.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,zeta,value"));
    assert_eq!(lines.count(), 21);
    assert!(text
        .lines()
        .nth(1)
        .unwrap()
        .starts_with("5.0000000000000000e-1,"));
}

#[test]
fn plot_flag_writes_svg() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SHORT);
    let out = mfg(&["run", &cfg, "--out-dir", "p", "--plot"], dir.path());
    assert!(out.status.success());
    let svg = fs::read_to_string(dir.path().join("p/nplayer.svg")).unwrap();
    assert!(svg.contains("<svg"));
}

#[test]
fn config_errors_exit_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SHORT);
    let out = mfg(
        &["run", &cfg, "--model", "paradigm", "--solver", "hjb"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_line(&out)["error"], "config");

    let bad = write_config(dir.path(), "[solver]\nn_grid = many\n");
    let out = mfg(&["run", &bad], dir.path());
    assert_eq!(out.status.code(), Some(2));

    let out = mfg(&["run", "missing.ini"], dir.path());
    assert_eq!(out.status.code(), Some(2));

    let out = mfg(&["run", &cfg, "--no-such-flag"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_line(&out)["error"], "config");
}

#[test]
fn blow_up_exits_with_code_three() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SHORT);
    let out = mfg(
        &[
            "run",
            &cfg,
            "--n-grid",
            "400",
            "--dt",
            "0.05",
            "--t-final",
            "10",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(3));
    let err = error_line(&out);
    assert_eq!(err["error"], "numerical");
    assert!(err["message"].as_str().unwrap().contains("blow-up"));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &format!("{SHORT}threads = 4\n"));
    for name in ["a", "b"] {
        assert!(mfg(
            &["run", &cfg, "--out-dir", name, "--solver", "density"],
            dir.path()
        )
        .status
        .success());
    }
    let mut names: Vec<_> = fs::read_dir(dir.path().join("a"))
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    assert!(!names.is_empty());
    for n in names {
        let a = fs::read(dir.path().join("a").join(&n)).unwrap();
        let b = fs::read(dir.path().join("b").join(&n)).unwrap();
        assert_eq!(a, b, "{n:?}");
    }
}
