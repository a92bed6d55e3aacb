//! Godunov solver for the reduced Hamilton-Jacobi equation of potential
//! games,
//!
//! ```text
//! -Upsilon_t + H~(d_zeta Upsilon, zeta) = 0,   Upsilon(zeta, T) = Psi0(zeta, 1 - zeta),
//! H~(p, zeta) = -zeta (p^+)^2 / 2 - (1 - zeta) ((-p)^+)^2 / 2 + F(zeta, 1 - zeta),
//! ```
//!
//! whose derivative `d_zeta Upsilon` is the mean-field `w = U1 - U2`.

use crate::error::{Error, Result};
use crate::game::{positive_part, ModelSpec, Potential, SimplexPoint};
use crate::grid::{fill_indexed, RunArtifact, ScalarGrid, SolverConfig};
use crate::shock;

#[derive(Debug, Clone, PartialEq)]
pub struct HjConfig {
    pub solver: SolverConfig,
    /// Dirichlet cap on the boundary values. `None` picks `10 (1 + max Psi0)`.
    pub c_d: Option<f64>,
}

impl HjConfig {
    pub fn new(solver: SolverConfig) -> Self {
        HjConfig { solver, c_d: None }
    }

    pub fn with_cap(mut self, c_d: f64) -> Self {
        self.c_d = Some(c_d);
        self
    }
}

fn potential_of(model: &(impl ModelSpec + ?Sized)) -> Result<&dyn Potential> {
    model
        .potential()
        .ok_or_else(|| Error::MissingPotential(model.name().to_string()))
}

#[inline]
fn h_tilde(p: f64, zeta: f64, zeta_c: f64, f: f64) -> f64 {
    let a = positive_part(p);
    let b = positive_part(-p);
    -0.5 * zeta * (a * a) - 0.5 * zeta_c * (b * b) + f
}

/// `H^(alpha, beta)`: min of `H~` over `[alpha, beta]` when `alpha <= beta`,
/// otherwise max over `[beta, alpha]`.
///
/// `H~` is concave with both parabola vertices at `p = 0`, so the min sits at an
/// endpoint and the max at `0` when the interval contains it.
#[inline]
fn godunov_kernel(alpha: f64, beta: f64, zeta: f64, zeta_c: f64, f: f64) -> f64 {
    let ha = h_tilde(alpha, zeta, zeta_c, f);
    let hb = h_tilde(beta, zeta, zeta_c, f);
    if alpha <= beta {
        ha.min(hb)
    } else if beta <= 0.0 && 0.0 <= alpha {
        ha.max(hb).max(h_tilde(0.0, zeta, zeta_c, f))
    } else {
        ha.max(hb)
    }
}

/// `H~(p, zeta)` for a model with a potential.
pub fn reduced_hamiltonian(p: f64, zeta: f64, model: &(impl ModelSpec + ?Sized)) -> Result<f64> {
    let pot = potential_of(model)?;
    let th = SimplexPoint::new(zeta)?;
    Ok(h_tilde(
        p,
        th.theta1(),
        th.theta2(),
        pot.value(th.theta1(), th.theta2()),
    ))
}

/// The Godunov numerical Hamiltonian `H^(alpha, beta)` at `zeta`.
pub fn godunov_flux(
    alpha: f64,
    beta: f64,
    zeta: f64,
    model: &(impl ModelSpec + ?Sized),
) -> Result<f64> {
    let pot = potential_of(model)?;
    let th = SimplexPoint::new(zeta)?;
    Ok(godunov_kernel(
        alpha,
        beta,
        th.theta1(),
        th.theta2(),
        pot.value(th.theta1(), th.theta2()),
    ))
}

/// `d_zeta Upsilon`: centered differences inside, one-sided at both ends.
pub fn derivative_of_upsilon(grid: &ScalarGrid) -> ScalarGrid {
    let v = &grid.values;
    let n = grid.n();
    if n == 0 {
        return ScalarGrid::new(grid.t, vec![0.0; v.len()]);
    }
    let nf = n as f64;
    let mut d = vec![0.0; n + 1];
    d[0] = (v[1] - v[0]) * nf;
    d[n] = (v[n] - v[n - 1]) * nf;
    for k in 1..n {
        d[k] = (v[k + 1] - v[k - 1]) * (nf / 2.0);
    }
    ScalarGrid::new(grid.t, d)
}

/// Marches `Upsilon` backward from `T` with
/// `Upsilon(t - dt) = Upsilon(t) + dt H^(delta+ Upsilon, delta- Upsilon)`,
/// using `H^(delta+, 0)` at `zeta = 0` and `H^(0, delta-)` at `zeta = 1`, both capped at `c_D`.
pub fn solve_hjb(
    model: &(impl ModelSpec + ?Sized),
    cfg: &HjConfig,
) -> Result<RunArtifact<ScalarGrid>> {
    let sc = &cfg.solver;
    sc.validate()?;
    let pot = potential_of(model)?;
    let n = sc.n_grid;
    let nf = n as f64;
    let steps = sc.steps();
    let mask = sc.snapshot_mask();
    let pool = sc.execution.pool()?;

    let points: Vec<SimplexPoint> = (0..=n).map(|k| SimplexPoint::on_grid(k, n)).collect();
    let mut f = Vec::with_capacity(n + 1);
    let mut ups = Vec::with_capacity(n + 1);
    for th in &points {
        let (fv, pv) = (
            pot.value(th.theta1(), th.theta2()),
            pot.terminal(th.theta1(), th.theta2()),
        );
        if !fv.is_finite() || !pv.is_finite() {
            return Err(Error::Domain {
                what: "potential",
                zeta: th.zeta(),
            });
        }
        f.push(fv);
        ups.push(pv);
    }
    let c_d = cfg
        .c_d
        .unwrap_or_else(|| 10.0 * (1.0 + ups.iter().cloned().fold(f64::NEG_INFINITY, f64::max)));
    if let Some(max) = ups.iter().cloned().reduce(f64::max).filter(|m| !(c_d > *m)) {
        return Err(Error::Config(format!(
            "c_D = {c_d} must exceed the largest terminal value {max}"
        )));
    }

    let mut run = RunArtifact::new(n, sc.dt);
    let record = |run: &mut RunArtifact<ScalarGrid>, t: f64, ups: &[f64]| {
        let grid = ScalarGrid::new(t, ups.to_vec());
        run.diagnostics
            .push(shock::diagnose(&derivative_of_upsilon(&grid), None));
        run.snapshots.push(grid);
    };
    if mask[steps] {
        record(&mut run, sc.t_final, &ups);
    }
    let mut next = vec![0.0; n + 1];
    for s in 1..=steps {
        {
            let (u, f, pts) = (&ups[..], &f[..], &points[..]);
            let dt = sc.dt;
            fill_indexed(pool.as_ref(), &mut next, |k| {
                let (z, zc) = (pts[k].theta1(), pts[k].theta2());
                if k == 0 {
                    let dp = (u[1] - u[0]) * nf;
                    (u[0] + dt * godunov_kernel(dp, 0.0, z, zc, f[0])).min(c_d)
                } else if k == n {
                    let dm = (u[n] - u[n - 1]) * nf;
                    (u[n] + dt * godunov_kernel(0.0, dm, z, zc, f[n])).min(c_d)
                } else {
                    let dp = (u[k + 1] - u[k]) * nf;
                    let dm = (u[k] - u[k - 1]) * nf;
                    u[k] + dt * godunov_kernel(dp, dm, z, zc, f[k])
                }
            });
        }
        std::mem::swap(&mut ups, &mut next);
        let m = steps - s;
        let t = sc.time_at(m);
        let magnitude = ups.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        if !(magnitude <= sc.blowup_bound) {
            return Err(Error::BlowUp {
                t,
                magnitude,
                bound: sc.blowup_bound,
            });
        }
        if mask[m] {
            record(&mut run, t, &ups);
        }
    }
    run.sort_by_time();
    Ok(run)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{FnModel, State};
    use crate::grid::Snapshots;
    use crate::models::{paradigm_model, shock_model, CesParams};
    use proptest::prelude::*;

    fn dense_oracle(alpha: f64, beta: f64, zeta: f64, f: f64, samples: usize) -> f64 {
        let (lo, hi) = if alpha <= beta {
            (alpha, beta)
        } else {
            (beta, alpha)
        };
        let vals = (0..samples).map(|i| {
            let q = lo + (hi - lo) * i as f64 / (samples - 1) as f64;
            h_tilde(q, zeta, 1.0 - zeta, f)
        });
        // add the exact breakpoint so the max is not limited by grid resolution
        let zero = (lo <= 0.0 && 0.0 <= hi).then(|| h_tilde(0.0, zeta, 1.0 - zeta, f));
        let vals = vals.chain(zero);
        if alpha <= beta {
            vals.fold(f64::INFINITY, f64::min)
        } else {
            vals.fold(f64::NEG_INFINITY, f64::max)
        }
    }

    #[test]
    fn reduced_hamiltonian_examples() {
        let m = shock_model();
        assert!((reduced_hamiltonian(0.0, 0.5, &m).unwrap() - 0.25).abs() < 1e-15);
        assert!(reduced_hamiltonian(1.0, 0.5, &m).unwrap().abs() < 1e-15);
        assert!((reduced_hamiltonian(-2.0, 0.0, &m).unwrap() + 2.0).abs() < 1e-15);
    }

    #[test]
    fn missing_potential_is_a_config_error() {
        let m = paradigm_model(CesParams::REFERENCE).unwrap();
        let err = reduced_hamiltonian(0.0, 0.5, &m).unwrap_err();
        assert!(matches!(err, Error::MissingPotential(_)));
        assert_eq!(err.kind(), "config");
        assert!(solve_hjb(&m, &HjConfig::new(SolverConfig::new(10, 0.01, 0.1))).is_err());
    }

    #[test]
    fn godunov_examples() {
        let m = shock_model();
        assert!(godunov_flux(-1.0, 1.0, 0.5, &m).unwrap().abs() < 1e-15);
        assert!((godunov_flux(1.0, -1.0, 0.5, &m).unwrap() - 0.25).abs() < 1e-15);
        let q = 0.7;
        assert_eq!(
            godunov_flux(q, q, 0.3, &m).unwrap(),
            reduced_hamiltonian(q, 0.3, &m).unwrap()
        );
        // frozen dense-sampling values
        assert!((dense_oracle(-1.0, 1.0, 0.5, 0.25, 100_000) - 0.0).abs() < 1e-12);
        assert!((dense_oracle(1.0, -1.0, 0.5, 0.25, 100_000) - 0.25).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn flux_is_consistent(p in -5.0f64..5.0, zeta in 0.0f64..=1.0) {
            let m = shock_model();
            prop_assert_eq!(godunov_flux(p, p, zeta, &m).unwrap(), reduced_hamiltonian(p, zeta, &m).unwrap());
        }

        #[test]
        fn flux_matches_dense_sampling(a in -4.0f64..4.0, b in -4.0f64..4.0, zeta in 0.0f64..=1.0) {
            let m = shock_model();
            let exact = godunov_flux(a, b, zeta, &m).unwrap();
            let f = zeta * (1.0 - zeta);
            prop_assert!((exact - dense_oracle(a, b, zeta, f, 20_001)).abs() < 1e-6);
        }
    }

    #[test]
    fn derivative_examples() {
        let lin = ScalarGrid::from_fn(0.0, 10, |z| 3.0 * z + 1.0);
        for v in derivative_of_upsilon(&lin).values {
            assert!((v - 3.0).abs() < 1e-12);
        }
        let c = ScalarGrid::from_fn(0.0, 10, |_| 4.0);
        assert!(derivative_of_upsilon(&c).values.iter().all(|v| *v == 0.0));
        let q = ScalarGrid::from_fn(0.0, 100, |z| z * z);
        let d = derivative_of_upsilon(&q);
        for k in 1..100 {
            assert!((d.values[k] - 2.0 * k as f64 / 100.0).abs() < 1e-12);
        }
    }

    #[test]
    fn terminal_values_and_cap() {
        let m = shock_model();
        let cfg =
            HjConfig::new(SolverConfig::new(20, 1e-3, 1.0).with_snapshots(Snapshots::Stride(50)));
        let run = solve_hjb(&m, &cfg).unwrap();
        let last = run.snapshots.last().unwrap();
        assert_eq!(last.t, 1.0);
        assert_eq!(last.values[10], 0.0);
        let c_d = 10.0 * (1.0 + 0.25);
        for g in &run.snapshots {
            assert!(g.values[0] <= c_d && g.values[20] <= c_d);
        }
        let tight = cfg.clone().with_cap(0.3);
        for g in &solve_hjb(&m, &tight).unwrap().snapshots {
            assert!(g.values[0] <= 0.3 && g.values[20] <= 0.3);
        }
        assert!(solve_hjb(&m, &cfg.with_cap(0.1)).is_err());
    }

    #[test]
    fn flat_potential_is_stationary() {
        let m = FnModel::new(
            "flat",
            |_: State, _: SimplexPoint| 0.0,
            |_: State, _: SimplexPoint| 0.0,
        )
        .with_potential(|_, _| 0.0, |_, _| 1.5);
        let run = solve_hjb(&m, &HjConfig::new(SolverConfig::new(16, 1e-3, 0.5))).unwrap();
        for g in &run.snapshots {
            assert!(g.values.iter().all(|v| *v == 1.5));
        }
    }
}
