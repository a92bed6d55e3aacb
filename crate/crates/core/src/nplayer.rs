//! Backward integration of the N+1-player Nash-equilibrium system on the
//! grid `zeta_k = k / N`.
//!
//! For a reference player in state 1 with `k` of the other `N` players in
//! state 1:
//!
//! ```text
//! -du1_k/dt = N(1-zeta_k) (u2_{k+1} - u1_{k+1})^+ (u1_{k+1} - u1_k)
//!           + N zeta_k    (u1_k - u2_k)^+         (u1_{k-1} - u1_k)
//!           + f(1, zeta_k) - ((u1_k - u2_k)^+)^2 / 2
//! -du2_k/dt = N(1-zeta_k) (u2_k - u1_k)^+         (u2_{k+1} - u2_k)
//!           + N zeta_k    (u1_{k-1} - u2_{k-1})^+ (u2_{k-1} - u2_k)
//!           + f(2, zeta_k) - ((u2_k - u1_k)^+)^2 / 2
//! ```
//!
//! The factors `zeta_0 = 0` and `1 - zeta_N = 0` remove the neighbours outside
//! the grid, so no boundary data is needed.

use log::warn;

use crate::error::{Error, Result};
use crate::game::{positive_part, ModelSpec, SimplexPoint, State};
use crate::grid::{fill_indexed, RunArtifact, ScalarGrid, SolverConfig, ValueGrid};
use crate::shock;

/// Coupling values `f(i, zeta_k)` tabulated once per run.
#[derive(Debug, Clone)]
pub(crate) struct CouplingTable {
    pub f1: Vec<f64>,
    pub f2: Vec<f64>,
}

impl CouplingTable {
    pub fn new(model: &(impl ModelSpec + ?Sized), n: usize) -> Result<Self> {
        let mut f1 = Vec::with_capacity(n + 1);
        let mut f2 = Vec::with_capacity(n + 1);
        for k in 0..=n {
            let th = SimplexPoint::on_grid(k, n);
            let a = model.coupling(State::One, th);
            let b = model.coupling(State::Two, th);
            if !a.is_finite() || !b.is_finite() {
                return Err(Error::Domain {
                    what: "coupling f",
                    zeta: th.zeta(),
                });
            }
            f1.push(a);
            f2.push(b);
        }
        Ok(CouplingTable { f1, f2 })
    }
}

/// `(-du1_k/dt, -du2_k/dt)` at index `k`. Reads only `k-1`, `k`, `k+1`.
#[inline]
fn minus_dudt(k: usize, n: usize, u1: &[f64], u2: &[f64], f1: f64, f2: f64) -> (f64, f64) {
    let nf = n as f64;
    let zeta = k as f64 / nf;
    let zeta_c = (n - k) as f64 / nf;

    let (a1, a2) = if k < n {
        (
            nf * zeta_c * positive_part(u2[k + 1] - u1[k + 1]) * (u1[k + 1] - u1[k]),
            nf * zeta_c * positive_part(u2[k] - u1[k]) * (u2[k + 1] - u2[k]),
        )
    } else {
        (0.0, 0.0)
    };
    let (b1, b2) = if k > 0 {
        (
            nf * zeta * positive_part(u1[k] - u2[k]) * (u1[k - 1] - u1[k]),
            nf * zeta * positive_part(u1[k - 1] - u2[k - 1]) * (u2[k - 1] - u2[k]),
        )
    } else {
        (0.0, 0.0)
    };
    let g1 = positive_part(u1[k] - u2[k]);
    let g2 = positive_part(u2[k] - u1[k]);
    (
        a1 + b1 + f1 - 0.5 * (g1 * g1),
        a2 + b2 + f2 - 0.5 * (g2 * g2),
    )
}

/// Time derivatives `(du1/dt, du2/dt)` of the N+1-player system.
pub fn rhs_nplayer(
    grid: &ValueGrid,
    model: &(impl ModelSpec + ?Sized),
) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = grid.n();
    let table = CouplingTable::new(model, n)?;
    let (mut d1, mut d2) = (Vec::with_capacity(n + 1), Vec::with_capacity(n + 1));
    for k in 0..=n {
        let (r1, r2) = minus_dudt(k, n, &grid.u1, &grid.u2, table.f1[k], table.f2[k]);
        d1.push(-r1);
        d2.push(-r2);
    }
    Ok((d1, d2))
}

/// Terminal grid `u_k^i(T) = psi(i, zeta_k)`.
pub fn terminal_grid(
    model: &(impl ModelSpec + ?Sized),
    n: usize,
    t_final: f64,
) -> Result<ValueGrid> {
    let (u1, u2) = (0..=n)
        .map(|k| {
            let th = SimplexPoint::on_grid(k, n);
            (
                model.terminal(State::One, th),
                model.terminal(State::Two, th),
            )
        })
        .unzip();
    ValueGrid::new(t_final, u1, u2).map_err(|_| Error::Domain {
        what: "terminal value psi",
        zeta: f64::NAN,
    })
}

/// Pointwise difference `w = u1 - u2`.
pub fn extract_w(grid: &ValueGrid) -> ScalarGrid {
    ScalarGrid::new(
        grid.t,
        grid.u1.iter().zip(&grid.u2).map(|(a, b)| a - b).collect(),
    )
}

/// `w` for every snapshot of an N+1-player run, with its diagnostics.
pub fn w_run(run: &RunArtifact<ValueGrid>) -> RunArtifact<ScalarGrid> {
    RunArtifact {
        n_grid: run.n_grid,
        dt: run.dt,
        snapshots: run.snapshots.iter().map(extract_w).collect(),
        diagnostics: run.diagnostics.clone(),
        cfl_warnings: run.cfl_warnings,
    }
}

/// Explicit Euler march `u(t - dt) = u(t) + dt * (-du/dt)(u(t))` from `T` to
/// `0`, calling `record(t, u1, u2)` at every masked step. Returns the number of
/// steps at which the CFL guard fired.
fn march(
    model: &(impl ModelSpec + ?Sized),
    cfg: &SolverConfig,
    mut record: impl FnMut(f64, &[f64], &[f64]),
) -> Result<usize> {
    cfg.validate()?;
    let n = cfg.n_grid;
    let steps = cfg.steps();
    let table = CouplingTable::new(model, n)?;
    let mask = cfg.snapshot_mask();
    let pool = cfg.execution.pool()?;

    let terminal = terminal_grid(model, n, cfg.t_final)?;
    let (mut u1, mut u2) = (terminal.u1, terminal.u2);
    let mut rhs = vec![(0.0, 0.0); n + 1];
    let mut cfl_warnings = 0;

    if mask[steps] {
        record(cfg.t_final, &u1, &u2);
    }
    for s in 1..=steps {
        {
            let (u1, u2) = (&u1[..], &u2[..]);
            let (f1, f2) = (&table.f1[..], &table.f2[..]);
            fill_indexed(pool.as_ref(), &mut rhs, |k| {
                minus_dudt(k, n, u1, u2, f1[k], f2[k])
            });
        }
        let mut magnitude = 0.0f64;
        let mut w_max = 0.0f64;
        for k in 0..=n {
            u1[k] += cfg.dt * rhs[k].0;
            u2[k] += cfg.dt * rhs[k].1;
            magnitude = magnitude.max(u1[k].abs()).max(u2[k].abs());
            w_max = w_max.max((u1[k] - u2[k]).abs());
        }
        let m = steps - s;
        let t = cfg.time_at(m);
        if !(magnitude <= cfg.blowup_bound) {
            return Err(Error::BlowUp {
                t,
                magnitude,
                bound: cfg.blowup_bound,
            });
        }
        if cfg.dt * n as f64 * w_max > cfg.cfl_limit {
            if cfl_warnings == 0 {
                warn!(
                    "CFL guard: dt * N * max|w| = {} > {} at t = {t}",
                    cfg.dt * n as f64 * w_max,
                    cfg.cfl_limit
                );
            }
            cfl_warnings += 1;
        }
        if mask[m] {
            record(t, &u1, &u2);
        }
    }
    Ok(cfl_warnings)
}

/// Integrates the N+1-player system backward from `u(T) = psi` to `t = 0`.
pub fn solve_nplayer(
    model: &(impl ModelSpec + ?Sized),
    cfg: &SolverConfig,
) -> Result<RunArtifact<ValueGrid>> {
    let mut run = RunArtifact::new(cfg.n_grid, cfg.dt);
    run.cfl_warnings = march(model, cfg, |t, u1, u2| {
        let grid = ValueGrid {
            t,
            u1: u1.to_vec(),
            u2: u2.to_vec(),
        };
        run.diagnostics
            .push(shock::diagnose(&extract_w(&grid), None));
        run.snapshots.push(grid);
    })?;
    run.sort_by_time();
    Ok(run)
}

/// Same integration as [`solve_nplayer`], keeping only `w = u1 - u2`.
///
/// Cheaper to store when every step is recorded, e.g. as input to
/// [`crate::shock::solve_density`].
pub fn solve_nplayer_w(
    model: &(impl ModelSpec + ?Sized),
    cfg: &SolverConfig,
) -> Result<RunArtifact<ScalarGrid>> {
    let mut run = RunArtifact::new(cfg.n_grid, cfg.dt);
    run.cfl_warnings = march(model, cfg, |t, u1, u2| {
        run.snapshots.push(ScalarGrid::new(
            t,
            u1.iter().zip(u2).map(|(a, b)| a - b).collect(),
        ));
    })?;
    run.sort_by_time();
    run.diagnostics = run
        .snapshots
        .iter()
        .map(|g| shock::diagnose(g, None))
        .collect();
    Ok(run)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Execution, Snapshots};
    use crate::models::shock_model;

    fn grid(u1: &[f64], u2: &[f64]) -> ValueGrid {
        ValueGrid::new(10.0, u1.to_vec(), u2.to_vec()).unwrap()
    }

    #[test]
    fn rhs_hand_examples() {
        let m = shock_model();
        let (d1, d2) = rhs_nplayer(&grid(&[0.0; 3], &[1.0; 3]), &m).unwrap();
        assert!((d1[1] - (-0.5)).abs() < 1e-12);
        assert!(d2[1].abs() < 1e-12);
        let (d1, _) = rhs_nplayer(&grid(&[0.0, 1.0, 2.0], &[0.0; 3]), &m).unwrap();
        assert!((d1[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rhs_is_local() {
        let m = shock_model();
        let base_u1 = vec![0.3, -0.2, 0.9, 0.1, -0.4, 0.5, 0.0];
        let base_u2 = vec![-0.1, 0.4, 0.2, 0.6, 0.3, -0.5, 0.2];
        let (r1, r2) = rhs_nplayer(&grid(&base_u1, &base_u2), &m).unwrap();
        // perturbing index 5 must not change k = 0..=3
        let mut p1 = base_u1.clone();
        let mut p2 = base_u2.clone();
        p1[5] += 7.0;
        p2[5] -= 3.0;
        let (q1, q2) = rhs_nplayer(&grid(&p1, &p2), &m).unwrap();
        for k in 0..=3 {
            assert_eq!(r1[k], q1[k]);
            assert_eq!(r2[k], q2[k]);
        }
    }

    #[test]
    fn extract_w_examples() {
        let w = extract_w(&grid(&[1.0, 1.0], &[0.0, 2.0]));
        assert_eq!(w.values, vec![1.0, -1.0]);
        let w = extract_w(&grid(&[0.3; 4], &[0.3; 4]));
        assert!(w.values.iter().all(|v| *v == 0.0));
        let term = terminal_grid(&shock_model(), 10, 10.0).unwrap();
        for (k, v) in extract_w(&term).values.iter().enumerate() {
            assert!((v - (2.0 * k as f64 / 10.0 - 1.0)).abs() < 1e-15);
        }
    }

    #[test]
    fn terminal_condition_is_exact() {
        let m = shock_model();
        let cfg = SolverConfig::new(20, 1e-3, 0.5);
        let run = solve_nplayer(&m, &cfg).unwrap();
        let last = run.snapshots.last().unwrap();
        assert_eq!(last.t, 0.5);
        assert_eq!(last, &terminal_grid(&m, 20, 0.5).unwrap());
        assert_eq!(run.snapshots.first().unwrap().t, 0.0);
    }

    #[test]
    fn serial_and_threaded_runs_are_identical() {
        let m = shock_model();
        let cfg = SolverConfig::new(64, 1e-3, 1.0).with_snapshots(Snapshots::Stride(100));
        let a = solve_nplayer(&m, &cfg).unwrap();
        let b = solve_nplayer(&m, &cfg.clone().with_execution(Execution::Threads(4))).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn blow_up_is_reported() {
        let m = shock_model();
        // dt * N far beyond any stable range
        let mut cfg = SolverConfig::new(400, 0.05, 10.0);
        cfg.blowup_bound = 1e3;
        let err = solve_nplayer(&m, &cfg).unwrap_err();
        assert!(matches!(err, Error::BlowUp { .. }), "{err:?}");
    }

    #[test]
    fn cfl_guard_counts_warnings() {
        let m = shock_model();
        let cfg = SolverConfig::new(400, 2e-3, 0.2);
        let run = solve_nplayer(&m, &cfg).unwrap();
        assert!(run.cfl_warnings > 0);
        let calm = solve_nplayer(&m, &SolverConfig::new(50, 1e-4, 0.2)).unwrap();
        assert_eq!(calm.cfl_warnings, 0);
    }
}
