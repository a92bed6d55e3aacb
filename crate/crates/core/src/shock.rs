//! Scalar reduction `w = U1 - U2`, the density transport law it drives, and
//! shock diagnostics.
//!
//! `w` solves `-w_t = a(w, zeta) d_zeta w + q(w, zeta)` with
//! `a = ((1 - 2 zeta)|w| - w) / 2` and `q = f(1) - f(2) - |w| w / 2`, while the
//! density obeys `P_t + d_zeta(a P) = 0` forward in time.

use log::warn;

use crate::error::{Error, Result};
use crate::game::{ModelSpec, SimplexPoint};
use crate::grid::{fill_indexed, DiagnosticRow, RunArtifact, ScalarGrid, SolverConfig};
use crate::nplayer::{terminal_grid, CouplingTable};

/// Threshold factor used by [`diagnose`].
pub const DEFAULT_JUMP_FACTOR: f64 = 5.0;

/// Jumps smaller than this fraction of the grid's range never count.
const JUMP_NOISE_FLOOR: f64 = 1e-12;

/// Tolerance of the sign conditions `w(0) >= 0`, `w(1) <= 0`.
const SIGN_TOL: f64 = 1e-10;

/// Density values below this abort the run.
const NEGATIVITY_TOL: f64 = -1e-12;

/// `a(w, zeta) = ((1 - 2 zeta)|w| - w) / 2`, equal to the drift `g1((w, 0), zeta)`.
#[inline]
pub fn advection_coefficient(w: f64, zeta: f64) -> f64 {
    ((1.0 - 2.0 * zeta) * w.abs() - w) / 2.0
}

#[inline]
fn source_with(w: f64, f1: f64, f2: f64) -> f64 {
    f1 - f2 - 0.5 * w.abs() * w
}

/// `q(w, zeta) = f(1, theta) - f(2, theta) - |w| w / 2`.
pub fn scalar_source(w: f64, zeta: f64, model: &(impl ModelSpec + ?Sized)) -> Result<f64> {
    let th = SimplexPoint::new(zeta)?;
    let (f1, f2) = (
        model.coupling(crate::game::State::One, th),
        model.coupling(crate::game::State::Two, th),
    );
    if !f1.is_finite() || !f2.is_finite() {
        return Err(Error::Domain {
            what: "coupling f",
            zeta,
        });
    }
    Ok(source_with(w, f1, f2))
}

/// Integrates `w` backward from `psi(1) - psi(2)` with first-order upwinding:
/// the forward difference where `a > 0`, the backward one where `a < 0`.
///
/// Since `a(w, 0) >= 0` and `a(w, 1) <= 0` for every `w`, the stencil never
/// leaves the grid.
pub fn solve_scalar(
    model: &(impl ModelSpec + ?Sized),
    cfg: &SolverConfig,
) -> Result<RunArtifact<ScalarGrid>> {
    cfg.validate()?;
    let n = cfg.n_grid;
    let nf = n as f64;
    let steps = cfg.steps();
    let mask = cfg.snapshot_mask();
    let pool = cfg.execution.pool()?;
    let table = CouplingTable::new(model, n)?;
    let zeta: Vec<f64> = (0..=n)
        .map(|k| SimplexPoint::on_grid(k, n).zeta())
        .collect();

    let term = terminal_grid(model, n, cfg.t_final)?;
    let mut w: Vec<f64> = term.u1.iter().zip(&term.u2).map(|(a, b)| a - b).collect();
    let mut next = vec![0.0; n + 1];
    let mut run = RunArtifact::new(n, cfg.dt);
    let record = |run: &mut RunArtifact<ScalarGrid>, t: f64, w: &[f64]| {
        let grid = ScalarGrid::new(t, w.to_vec());
        run.diagnostics.push(diagnose(&grid, None));
        run.snapshots.push(grid);
    };
    if mask[steps] {
        record(&mut run, cfg.t_final, &w);
    }
    for s in 1..=steps {
        {
            let (w, z, f1, f2, dt) = (&w[..], &zeta[..], &table.f1[..], &table.f2[..], cfg.dt);
            fill_indexed(pool.as_ref(), &mut next, |k| {
                let a = advection_coefficient(w[k], z[k]);
                let d = if a > 0.0 && k < n {
                    (w[k + 1] - w[k]) * nf
                } else if a < 0.0 && k > 0 {
                    (w[k] - w[k - 1]) * nf
                } else {
                    0.0
                };
                w[k] + dt * (a * d + source_with(w[k], f1[k], f2[k]))
            });
        }
        std::mem::swap(&mut w, &mut next);
        let m = steps - s;
        let t = cfg.time_at(m);
        let magnitude = w.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        if !(magnitude <= cfg.blowup_bound) {
            return Err(Error::BlowUp {
                t,
                magnitude,
                bound: cfg.blowup_bound,
            });
        }
        if cfg.dt * nf * magnitude > cfg.cfl_limit {
            if run.cfl_warnings == 0 {
                warn!(
                    "CFL guard: dt * N * max|w| = {} at t = {t}",
                    cfg.dt * nf * magnitude
                );
            }
            run.cfl_warnings += 1;
        }
        if mask[m] {
            record(&mut run, t, &w);
        }
    }
    run.sort_by_time();
    Ok(run)
}

/// Result of a density transport run.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityRun {
    pub run: RunArtifact<ScalarGrid>,
    /// Mass `h * sum(P)` after normalization at `t = 0`.
    pub initial_mass: f64,
    /// Net mass that left through the two boundaries.
    pub outflow: f64,
    /// Largest `|mass + outflow - initial_mass|` over all steps.
    pub max_mass_drift: f64,
    /// Smallest density value seen over all steps.
    pub min_density: f64,
}

/// Trapezoidal mass of a density grid.
pub fn density_mass(p: &ScalarGrid) -> f64 {
    let n = p.n();
    let h = 1.0 / n as f64;
    let inner: f64 = p.values.iter().sum();
    h * (inner - 0.5 * (p.values[0] + p.values[n]))
}

#[inline]
fn minmod(a: f64, b: f64) -> f64 {
    if a * b > 0.0 {
        a.signum() * a.abs().min(b.abs())
    } else {
        0.0
    }
}

/// Central-upwind flux through every interface `j + 1/2`, `j = 0..M`.
fn central_upwind_fluxes(p: &[f64], a: &[f64], flux: &mut [f64]) {
    let m = p.len() - 1;
    let slope = |j: usize| {
        if j == 0 || j == m {
            0.0
        } else {
            minmod(p[j] - p[j - 1], p[j + 1] - p[j])
        }
    };
    for j in 0..m {
        let left = p[j] + 0.5 * slope(j);
        let right = p[j + 1] - 0.5 * slope(j + 1);
        let ap = a[j].max(a[j + 1]).max(0.0);
        let am = a[j].min(a[j + 1]).min(0.0);
        let den = ap - am;
        flux[j] = if den > 0.0 {
            (ap * a[j] * left - am * a[j + 1] * right) / den + (ap * am / den) * (right - left)
        } else {
            0.0
        };
    }
}

/// Advances `P_t + d_zeta(a(w, zeta) P) = 0` forward from `t = 0` on the grid
/// `cfg.n_grid`, reading `w` from `w_run` (linear in time between snapshots and
/// linear in `zeta` when the grids differ).
///
/// Starts from `P = 1` inside, `0` at both ends, normalized to unit mass; the
/// end values stay pinned at zero.
pub fn solve_density(w_run: &RunArtifact<ScalarGrid>, cfg: &SolverConfig) -> Result<DensityRun> {
    cfg.validate()?;
    let m = cfg.n_grid;
    let h = 1.0 / m as f64;
    let mask = cfg.snapshot_mask();
    let zeta: Vec<f64> = (0..=m)
        .map(|k| SimplexPoint::on_grid(k, m).zeta())
        .collect();

    let mut p = vec![1.0; m + 1];
    p[0] = 0.0;
    p[m] = 0.0;
    let total: f64 = p.iter().sum::<f64>() * h;
    p.iter_mut().for_each(|v| *v /= total);
    let initial_mass = density_mass(&ScalarGrid::new(0.0, p.clone()));

    let w_at = |t: f64| w_run.interpolate_in_time(t).map(|g| g.resample(m));

    let mut out = DensityRun {
        run: RunArtifact::new(m, cfg.dt),
        initial_mass,
        outflow: 0.0,
        max_mass_drift: 0.0,
        min_density: p.iter().cloned().fold(f64::INFINITY, f64::min),
    };
    let record = |run: &mut RunArtifact<ScalarGrid>, t: f64, p: &[f64], w: &ScalarGrid| {
        let grid = ScalarGrid::new(t, p.to_vec());
        let mut row = diagnose(&grid, Some(density_mass(&grid)));
        (row.sign_ok_left, row.sign_ok_right) = sign_condition_check(w);
        run.diagnostics.push(row);
        run.snapshots.push(grid);
    };

    let mut a = vec![0.0; m + 1];
    let mut flux = vec![0.0; m];
    let mut w = w_at(0.0)?;
    if mask[0] {
        record(&mut out.run, 0.0, &p, &w);
    }
    for (s, &keep) in mask.iter().enumerate().skip(1) {
        for (k, ak) in a.iter_mut().enumerate() {
            *ak = advection_coefficient(w.values[k], zeta[k]);
        }
        central_upwind_fluxes(&p, &a, &mut flux);
        for j in 1..m {
            p[j] -= cfg.dt / h * (flux[j] - flux[j - 1]);
        }
        out.outflow += cfg.dt * (flux[m - 1] - flux[0]);
        let t = cfg.time_at(s);
        let min = p.iter().cloned().fold(f64::INFINITY, f64::min);
        out.min_density = out.min_density.min(min);
        if min < NEGATIVITY_TOL {
            return Err(Error::SchemeViolation { t, min });
        }
        let mass = h * p.iter().sum::<f64>();
        out.max_mass_drift = out
            .max_mass_drift
            .max((mass + out.outflow - initial_mass).abs());
        w = w_at(t)?;
        if keep {
            record(&mut out.run, t, &p, &w);
        }
    }
    Ok(out)
}

/// `[P] s' + [r P]`; zero when the jump satisfies the Rankine-Hugoniot condition.
pub fn rankine_hugoniot_residual(
    p_left: f64,
    p_right: f64,
    r_left: f64,
    r_right: f64,
    s_dot: f64,
) -> f64 {
    (p_right - p_left) * s_dot + (r_right * p_right - r_left * p_left)
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Indices `k` with `|v_{k+1} - v_k| > threshold_factor * median` one-cell jump.
pub fn jump_detector(grid: &ScalarGrid, threshold_factor: f64) -> Vec<usize> {
    let v = &grid.values;
    if v.len() < 2 {
        return Vec::new();
    }
    let jumps: Vec<f64> = v.windows(2).map(|p| (p[1] - p[0]).abs()).collect();
    let (lo, hi) = v
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| {
            (lo.min(*x), hi.max(*x))
        });
    let threshold = (threshold_factor * median(jumps.clone())).max(JUMP_NOISE_FLOOR * (hi - lo));
    jumps
        .iter()
        .enumerate()
        .filter(|(_, j)| **j > threshold)
        .map(|(k, _)| k)
        .collect()
}

/// Groups sorted indices into runs of consecutive values, as `(first, last)`.
pub fn jump_clusters(indices: &[usize]) -> Vec<(usize, usize)> {
    let mut out: Vec<(usize, usize)> = Vec::new();
    for &k in indices {
        match out.last_mut() {
            Some((_, last)) if *last + 1 == k => *last = k,
            _ => out.push((k, k)),
        }
    }
    out
}

/// Location in `zeta` of the jump between `k` and `k + 1`.
pub fn jump_location(k: usize, n: usize) -> f64 {
    (k as f64 + 0.5) / n as f64
}

/// `max_k |v_{k+1} - v_k| * N`.
pub fn max_slope(grid: &ScalarGrid) -> f64 {
    let n = grid.n() as f64;
    grid.values
        .windows(2)
        .map(|p| (p[1] - p[0]).abs())
        .fold(0.0, f64::max)
        * n
}

/// `(t, max slope)` for every snapshot.
pub fn max_slope_series(run: &RunArtifact<ScalarGrid>) -> Vec<(f64, f64)> {
    run.snapshots.iter().map(|g| (g.t, max_slope(g))).collect()
}

/// `(w_0 >= 0, w_N <= 0)` up to `1e-10`.
pub fn sign_condition_check(grid: &ScalarGrid) -> (bool, bool) {
    match (grid.values.first(), grid.values.last()) {
        (Some(a), Some(b)) => (*a >= -SIGN_TOL, *b <= SIGN_TOL),
        _ => (true, true),
    }
}

/// The jump cluster `(first, last)` containing the largest detected jump.
pub fn dominant_cluster(grid: &ScalarGrid, threshold_factor: f64) -> Option<(usize, usize)> {
    let v = &grid.values;
    let size = |k: usize| (v[k + 1] - v[k]).abs();
    let biggest = |c: &(usize, usize)| (c.0..=c.1).map(size).fold(0.0, f64::max);
    jump_clusters(&jump_detector(grid, threshold_factor))
        .into_iter()
        .max_by(|a, b| biggest(a).total_cmp(&biggest(b)))
}

/// [`dominant_cluster`] as a `zeta` range of jump locations.
pub fn dominant_jump(grid: &ScalarGrid, threshold_factor: f64) -> Option<(f64, f64)> {
    let n = grid.n();
    dominant_cluster(grid, threshold_factor)
        .map(|(lo, hi)| (jump_location(lo, n), jump_location(hi, n)))
}

/// Diagnostics row for one snapshot of `w` (or of any scalar field).
pub fn diagnose(grid: &ScalarGrid, mass: Option<f64>) -> DiagnosticRow {
    let (sign_ok_left, sign_ok_right) = sign_condition_check(grid);
    DiagnosticRow {
        t: grid.t,
        mass,
        max_slope: max_slope(grid),
        shock_zeta: dominant_jump(grid, DEFAULT_JUMP_FACTOR),
        sign_ok_left,
        sign_ok_right,
    }
}

/// Shock position over time, taken as the centre of the dominant jump cluster.
#[derive(Debug, Clone, PartialEq)]
pub struct ShockCurve {
    pub times: Vec<f64>,
    pub locations: Vec<f64>,
}

impl ShockCurve {
    /// Collects the snapshots of `run` where a jump is detected.
    pub fn from_run(run: &RunArtifact<ScalarGrid>, threshold_factor: f64) -> Self {
        let (times, locations) = run
            .snapshots
            .iter()
            .filter_map(|g| dominant_jump(g, threshold_factor).map(|(a, b)| (g.t, 0.5 * (a + b))))
            .unzip();
        ShockCurve { times, locations }
    }

    /// Shock speed `s'(t)` by centered differences (one-sided at the ends).
    pub fn speed(&self) -> Vec<f64> {
        let (t, s) = (&self.times, &self.locations);
        let n = t.len();
        (0..n)
            .map(|i| {
                if n < 2 {
                    return 0.0;
                }
                let (a, b) = (i.saturating_sub(1), (i + 1).min(n - 1));
                (s[b] - s[a]) / (t[b] - t[a])
            })
            .collect()
    }
}
