//! Grids on `zeta_k = k / N`, solver configuration and run artifacts.

use crate::error::{Error, Result};

/// Nodes `zeta_k = k / N`, `k = 0..=N`.
pub fn zeta_nodes(n: usize) -> Vec<f64> {
    (0..=n).map(|k| k as f64 / n as f64).collect()
}

/// Anything recorded at a time instant.
pub trait Frame {
    fn time(&self) -> f64;
}

/// Values `u1_k`, `u2_k` over the simplex grid at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueGrid {
    pub t: f64,
    pub u1: Vec<f64>,
    pub u2: Vec<f64>,
}

impl ValueGrid {
    pub fn new(t: f64, u1: Vec<f64>, u2: Vec<f64>) -> Result<Self> {
        if u1.len() != u2.len() || u1.len() < 2 {
            return Err(Error::Config(format!(
                "value grid needs two arrays of equal length >= 2, got {} and {}",
                u1.len(),
                u2.len()
            )));
        }
        if u1.iter().chain(&u2).any(|v| !v.is_finite()) {
            return Err(Error::Config(
                "value grid contains non-finite entries".into(),
            ));
        }
        Ok(ValueGrid { t, u1, u2 })
    }

    /// Grid size `N` (number of intervals).
    pub fn n(&self) -> usize {
        self.u1.len() - 1
    }
}

impl Frame for ValueGrid {
    fn time(&self) -> f64 {
        self.t
    }
}

/// A single real field over the grid (used for `w`, `Upsilon` and `P`).
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarGrid {
    pub t: f64,
    pub values: Vec<f64>,
}

impl ScalarGrid {
    pub fn new(t: f64, values: Vec<f64>) -> Self {
        ScalarGrid { t, values }
    }

    pub fn from_fn(t: f64, n: usize, f: impl Fn(f64) -> f64) -> Self {
        ScalarGrid {
            t,
            values: zeta_nodes(n).into_iter().map(f).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.values.len().saturating_sub(1)
    }

    /// Piecewise-linear value at `zeta` in `[0, 1]`.
    pub fn value_at(&self, zeta: f64) -> f64 {
        let n = self.n();
        let x = (zeta * n as f64).clamp(0.0, n as f64);
        let k = (x.floor() as usize).min(n.saturating_sub(1));
        let frac = x - k as f64;
        if frac == 0.0 {
            return self.values[k];
        }
        self.values[k] + frac * (self.values[k + 1] - self.values[k])
    }

    /// Linear interpolation onto an `m`-interval grid. Identity when `m == N`.
    pub fn resample(&self, m: usize) -> ScalarGrid {
        if m == self.n() {
            return self.clone();
        }
        ScalarGrid {
            t: self.t,
            values: zeta_nodes(m)
                .into_iter()
                .map(|z| self.value_at(z))
                .collect(),
        }
    }
}

impl Frame for ScalarGrid {
    fn time(&self) -> f64 {
        self.t
    }
}

/// How per-index updates of one time step are scheduled.
///
/// Every index is computed by the same arithmetic in the same order whatever
/// the schedule, so results are bit-identical across settings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    #[default]
    Serial,
    Threads(usize),
}

impl Execution {
    pub(crate) fn pool(&self) -> Result<Option<rayon::ThreadPool>> {
        match *self {
            Execution::Serial | Execution::Threads(0) | Execution::Threads(1) => Ok(None),
            Execution::Threads(n) => rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map(Some)
                .map_err(|e| Error::Config(format!("thread pool: {e}"))),
        }
    }
}

/// Writes `f(k)` into `out[k]` for every index, on `pool` when given.
pub(crate) fn fill_indexed<T, F>(pool: Option<&rayon::ThreadPool>, out: &mut [T], f: F)
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    match pool {
        None => out.iter_mut().enumerate().for_each(|(k, v)| *v = f(k)),
        Some(pool) => pool.install(|| {
            out.par_iter_mut()
                .with_min_len(16)
                .enumerate()
                .for_each(|(k, v)| *v = f(k))
        }),
    }
}

/// Which steps a solver records.
#[derive(Debug, Clone, PartialEq)]
pub enum Snapshots {
    /// The steps nearest to each requested time (no interpolation).
    Times(Vec<f64>),
    /// Every `k`-th step, plus both ends of the interval.
    Stride(usize),
    EveryStep,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub n_grid: usize,
    pub dt: f64,
    pub t_final: f64,
    pub snapshots: Snapshots,
    /// Abort once any `|value|` exceeds this.
    pub blowup_bound: f64,
    /// Warn once `dt * N * max|w|` exceeds this.
    pub cfl_limit: f64,
    pub execution: Execution,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            n_grid: 100,
            dt: 1e-4,
            t_final: 10.0,
            snapshots: Snapshots::Times(vec![0.0, 10.0]),
            blowup_bound: 1e6,
            cfl_limit: 0.5,
            execution: Execution::Serial,
        }
    }
}

impl SolverConfig {
    pub fn new(n_grid: usize, dt: f64, t_final: f64) -> Self {
        SolverConfig {
            n_grid,
            dt,
            t_final,
            snapshots: Snapshots::Times(vec![0.0, t_final]),
            ..SolverConfig::default()
        }
    }

    pub fn with_snapshots(mut self, snapshots: Snapshots) -> Self {
        self.snapshots = snapshots;
        self
    }

    pub fn with_execution(mut self, execution: Execution) -> Self {
        self.execution = execution;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_grid < 2 {
            return Err(Error::Config(format!(
                "n_grid must be >= 2, got {}",
                self.n_grid
            )));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Config(format!(
                "dt must be positive, got {}",
                self.dt
            )));
        }
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return Err(Error::Config(format!(
                "t_final must be positive, got {}",
                self.t_final
            )));
        }
        let steps = (self.t_final / self.dt).round();
        if (steps * self.dt - self.t_final).abs() > 1e-9 * self.t_final {
            return Err(Error::Config(format!(
                "dt = {} does not divide t_final = {}",
                self.dt, self.t_final
            )));
        }
        if !(self.blowup_bound > 0.0) {
            return Err(Error::Config("blowup_bound must be positive".into()));
        }
        match &self.snapshots {
            Snapshots::Times(ts) => {
                if let Some(t) = ts.iter().find(|t| !(0.0..=self.t_final).contains(*t)) {
                    return Err(Error::Config(format!(
                        "snapshot time {t} outside [0, {}]",
                        self.t_final
                    )));
                }
                if ts.windows(2).any(|w| w[0] > w[1]) {
                    return Err(Error::Config("snapshot times must be sorted".into()));
                }
            }
            Snapshots::Stride(0) => {
                return Err(Error::Config("snapshot stride must be positive".into()))
            }
            _ => {}
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        (self.t_final / self.dt).round() as usize
    }

    /// Time label of the `m`-th step counted from `t = 0`.
    ///
    /// Backward solvers at step `s` sit at `time_at(steps - s)`, forward solvers
    /// at `time_at(s)`, so both directions produce identical time stamps.
    pub fn time_at(&self, m: usize) -> f64 {
        let steps = self.steps();
        if m == steps {
            return self.t_final;
        }
        self.t_final * (m as f64 / steps as f64)
    }

    /// Marks, for every `m = 0..=steps` counted from `t = 0`, whether that step is recorded.
    pub(crate) fn snapshot_mask(&self) -> Vec<bool> {
        let steps = self.steps();
        let mut mask = vec![false; steps + 1];
        match &self.snapshots {
            Snapshots::Times(ts) => {
                for &t in ts {
                    let m = (t / self.dt).round().clamp(0.0, steps as f64) as usize;
                    mask[m] = true;
                }
            }
            Snapshots::Stride(k) => {
                for m in (0..=steps).step_by(*k) {
                    mask[m] = true;
                }
                mask[steps] = true;
            }
            Snapshots::EveryStep => mask.iter_mut().for_each(|b| *b = true),
        }
        mask
    }
}

/// One row of the per-snapshot diagnostics table.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticRow {
    pub t: f64,
    /// Discrete mass (density runs only).
    pub mass: Option<f64>,
    pub max_slope: f64,
    /// Extent of the detected jump cluster in `zeta`, if any.
    pub shock_zeta: Option<(f64, f64)>,
    pub sign_ok_left: bool,
    pub sign_ok_right: bool,
}

/// Time-indexed grids from one solver run, sorted by ascending time.
#[derive(Debug, Clone, PartialEq)]
pub struct RunArtifact<G> {
    pub n_grid: usize,
    pub dt: f64,
    pub snapshots: Vec<G>,
    pub diagnostics: Vec<DiagnosticRow>,
    /// Number of steps at which the CFL guard fired.
    pub cfl_warnings: usize,
}

impl<G: Frame> RunArtifact<G> {
    pub(crate) fn new(n_grid: usize, dt: f64) -> Self {
        RunArtifact {
            n_grid,
            dt,
            snapshots: Vec::new(),
            diagnostics: Vec::new(),
            cfl_warnings: 0,
        }
    }

    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(Frame::time).collect()
    }

    /// The snapshot nearest to `t`, if one lies within half a step.
    pub fn at_time(&self, t: f64) -> Option<&G> {
        let tol = 0.5 * self.dt + 1e-12;
        self.snapshots
            .iter()
            .min_by(|a, b| (a.time() - t).abs().total_cmp(&(b.time() - t).abs()))
            .filter(|g| (g.time() - t).abs() <= tol)
    }

    pub(crate) fn sort_by_time(&mut self) {
        self.snapshots.sort_by(|a, b| a.time().total_cmp(&b.time()));
        self.diagnostics.sort_by(|a, b| a.t.total_cmp(&b.t));
    }
}

impl RunArtifact<ScalarGrid> {
    /// `w` at time `t`, linear in time between bracketing snapshots.
    pub fn interpolate_in_time(&self, t: f64) -> Result<ScalarGrid> {
        let snaps = &self.snapshots;
        let (first, last) = match (snaps.first(), snaps.last()) {
            (Some(a), Some(b)) => (a, b),
            _ => return Err(Error::Incompatible("run has no snapshots".into())),
        };
        let tol = 1e-9 * (1.0 + t.abs());
        if t < first.t - tol || t > last.t + tol {
            return Err(Error::Incompatible(format!(
                "time {t} outside recorded range [{}, {}]",
                first.t, last.t
            )));
        }
        let idx = snaps.partition_point(|g| g.t < t);
        if idx < snaps.len() && (snaps[idx].t - t).abs() <= tol {
            return Ok(ScalarGrid::new(t, snaps[idx].values.clone()));
        }
        if idx == 0 {
            return Ok(ScalarGrid::new(t, first.values.clone()));
        }
        if idx == snaps.len() {
            return Ok(ScalarGrid::new(t, last.values.clone()));
        }
        let (a, b) = (&snaps[idx - 1], &snaps[idx]);
        let s = (t - a.t) / (b.t - a.t);
        let values = a
            .values
            .iter()
            .zip(&b.values)
            .map(|(x, y)| x + s * (y - x))
            .collect();
        Ok(ScalarGrid::new(t, values))
    }
}
