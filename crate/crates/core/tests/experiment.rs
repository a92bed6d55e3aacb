use std::fs;

use mfg_core::experiment::{
    read_scalar_grid, read_value_grid, run_experiment, ExperimentConfig, ModelKind, SolverKind,
};
use mfg_core::game::{ModelSpec, SimplexPoint, State};
use mfg_core::models::shock_model;
use mfg_core::Error;

fn config(dir: &std::path::Path, text: &str) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::from_ini_str(text).unwrap();
    cfg.out_dir = dir.to_path_buf();
    cfg
}

#[test]
fn default_nplayer_run_ends_on_psi() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(
        dir.path(),
        "[experiment]\nmodel = shock\nsolver = nplayer\n",
    );
    let out = run_experiment(&cfg).unwrap();
    assert_eq!(out.files.len(), 3);
    let last = read_value_grid(&out.files[1]).unwrap();
    assert_eq!(last.t, 10.0);
    let m = shock_model();
    for k in 0..=100 {
        let th = SimplexPoint::on_grid(k, 100);
        assert_eq!(last.u1[k], m.terminal(State::One, th));
        assert_eq!(last.u2[k], m.terminal(State::Two, th));
    }
    let diag = fs::read_to_string(&out.files[2]).unwrap();
    assert!(diag.starts_with(
        "t,mass,max_slope,shock_zeta_min,shock_zeta_max,sign_ok_left,sign_ok_right\n"
    ));
}

#[test]
fn compare_pipeline_writes_figure_table() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "[experiment]\nsolver = compare\n");
    let out = run_experiment(&cfg).unwrap();
    let table = fs::read_to_string(&out.files[0]).unwrap();
    let mut lines = table.lines();
    assert_eq!(lines.next(), Some("zeta,w_nplayer,dupsilon"));
    assert_eq!(lines.count(), 101);
    let metrics = fs::read_to_string(&out.files[1]).unwrap();
    let l1: f64 = metrics
        .lines()
        .find_map(|l| l.strip_prefix("l1_excluding_shock,"))
        .unwrap()
        .parse()
        .unwrap();
    assert!(l1 <= 0.05);
}

#[test]
fn scalar_snapshots_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(
        dir.path(),
        "[experiment]\nsolver = scalar\n[solver]\nn_grid = 40\ndt = 1e-3\nt_final = 1\nsnapshots = 0, 0.5, 1\n",
    );
    let out = run_experiment(&cfg).unwrap();
    let run = mfg_core::shock::solve_scalar(&shock_model(), &cfg.solver_config()).unwrap();
    for (path, grid) in out.files.iter().zip(&run.snapshots) {
        assert_eq!(&read_scalar_grid(path).unwrap(), grid);
    }
}

#[test]
fn hjb_without_potential_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config(dir.path(), "");
    cfg.model = ModelKind::Paradigm;
    cfg.solver = SolverKind::Hjb;
    let err = run_experiment(&cfg).unwrap_err();
    assert!(matches!(err, Error::MissingPotential(_)));
    assert_eq!(err.kind(), "config");
}

#[test]
fn oversized_step_is_a_numerical_failure() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(
        dir.path(),
        "[solver]\nn_grid = 400\ndt = 0.05\nt_final = 10\n",
    );
    let err = run_experiment(&cfg).unwrap_err();
    assert_eq!(err.kind(), "numerical");
}
