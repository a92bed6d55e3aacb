//! Python bindings for the two-state mean field game solvers.

use std::sync::Arc;

use mfg_core::experiment::parse_snapshots;
use mfg_core::shock::{dominant_jump, DEFAULT_JUMP_FACTOR};
use mfg_core::{
    self as core, CesParams, DiagnosticRow, Exclusion, Execution, IsoParams, ModelChoice,
    ModelSpec, Norm, ProductivitySign, RunArtifact, ScalarGrid, SimplexPoint, Snapshots, State,
    ValueGrid,
};
use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

create_exception!(mfg, MfgError, PyException, "Base class for solver errors.");
create_exception!(mfg, ConfigError, MfgError, "Invalid configuration.");
create_exception!(
    mfg,
    NumericalError,
    MfgError,
    "Blow-up, non-finite value or scheme violation."
);

fn to_py(e: core::Error) -> PyErr {
    match e.kind() {
        "config" => ConfigError::new_err(e.to_string()),
        "numerical" => NumericalError::new_err(e.to_string()),
        _ => MfgError::new_err(e.to_string()),
    }
}

fn state(i: usize) -> PyResult<State> {
    State::from_index(i).ok_or_else(|| PyValueError::new_err("state must be 1 or 2"))
}

/// A two-state game model.
#[pyclass(frozen, module = "mfg")]
struct Model {
    inner: Arc<dyn ModelSpec>,
}

impl Model {
    fn build(choice: ModelChoice, n_grid: usize) -> PyResult<Self> {
        let inner: Arc<dyn ModelSpec> = choice.build(n_grid).map_err(to_py)?.into();
        Ok(Model { inner })
    }
}

#[pymethods]
impl Model {
    /// Shock model: `f(1) = 1 - theta1`, `f(2) = theta1`, `psi(i) = theta_i - 1/2`.
    #[staticmethod]
    fn shock() -> PyResult<Self> {
        Model::build(ModelChoice::Shock, 1)
    }

    /// Paradigm-shift model with CES productivity.
    #[staticmethod]
    #[pyo3(signature = (a1 = 0.5, a2 = 0.9, r = 0.75, negate = false))]
    fn paradigm(a1: f64, a2: f64, r: f64, negate: bool) -> PyResult<Self> {
        let sign = if negate {
            ProductivitySign::Negated
        } else {
            ProductivitySign::Direct
        };
        Model::build(
            ModelChoice::Paradigm {
                params: CesParams { a1, a2, r },
                sign,
            },
            1,
        )
    }

    /// Consumer-choice model; `n_grid` sets the default clamp floor `1 / (10 N)`.
    #[staticmethod]
    #[pyo3(signature = (n_grid, eta = 1.0, s1 = 0.1, s2 = 0.075, floor = None))]
    fn consumer(n_grid: usize, eta: f64, s1: f64, s2: f64, floor: Option<f64>) -> PyResult<Self> {
        let params = IsoParams { eta, s1, s2 };
        Model::build(ModelChoice::Consumer { params, floor }, n_grid)
    }

    #[getter]
    fn name(&self) -> String {
        self.inner.name().to_string()
    }

    #[getter]
    fn has_potential(&self) -> bool {
        self.inner.potential().is_some()
    }

    /// Coupling `f(i, theta)` at `theta = (zeta, 1 - zeta)`.
    fn coupling(&self, state_index: usize, zeta: f64) -> PyResult<f64> {
        let th = SimplexPoint::new(zeta).map_err(to_py)?;
        Ok(self.inner.coupling(state(state_index)?, th))
    }

    /// Terminal value `psi(i, theta)`.
    fn terminal(&self, state_index: usize, zeta: f64) -> PyResult<f64> {
        let th = SimplexPoint::new(zeta).map_err(to_py)?;
        Ok(self.inner.terminal(state(state_index)?, th))
    }

    fn __repr__(&self) -> String {
        format!("Model({})", self.inner.name())
    }
}

/// Grid size, time step, horizon, recorded times and thread count.
#[pyclass(frozen, module = "mfg", name = "SolverConfig")]
struct PySolverConfig {
    inner: core::SolverConfig,
}

#[pymethods]
impl PySolverConfig {
    /// `snapshots` accepts a list of times, `"all"` or `"stride:K"`.
    #[new]
    #[pyo3(signature = (n_grid, dt, t_final, snapshots = None, threads = 1, blowup_bound = None))]
    fn new(
        n_grid: usize,
        dt: f64,
        t_final: f64,
        snapshots: Option<&Bound<'_, PyAny>>,
        threads: usize,
        blowup_bound: Option<f64>,
    ) -> PyResult<Self> {
        let mut cfg = core::SolverConfig::new(n_grid, dt, t_final)
            .with_execution(Execution::Threads(threads));
        if let Some(s) = snapshots {
            cfg.snapshots = if let Ok(text) = s.extract::<String>() {
                parse_snapshots(&text).map_err(to_py)?
            } else {
                let mut times: Vec<f64> = s.extract()?;
                times.sort_by(f64::total_cmp);
                Snapshots::Times(times)
            };
        }
        if let Some(b) = blowup_bound {
            cfg.blowup_bound = b;
        }
        cfg.validate().map_err(to_py)?;
        Ok(PySolverConfig { inner: cfg })
    }

    #[getter]
    fn n_grid(&self) -> usize {
        self.inner.n_grid
    }

    #[getter]
    fn dt(&self) -> f64 {
        self.inner.dt
    }

    #[getter]
    fn t_final(&self) -> f64 {
        self.inner.t_final
    }

    #[getter]
    fn steps(&self) -> usize {
        self.inner.steps()
    }
}

fn diagnostics_dicts<'py>(
    py: Python<'py>,
    rows: &[DiagnosticRow],
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    rows.iter()
        .map(|r| {
            let d = PyDict::new(py);
            d.set_item("t", r.t)?;
            d.set_item("mass", r.mass)?;
            d.set_item("max_slope", r.max_slope)?;
            d.set_item("shock_zeta", r.shock_zeta)?;
            d.set_item("sign_ok_left", r.sign_ok_left)?;
            d.set_item("sign_ok_right", r.sign_ok_right)?;
            Ok(d)
        })
        .collect()
}

/// Snapshots `(t, values)` of a single function on the grid.
#[pyclass(frozen, module = "mfg")]
struct ScalarRun {
    inner: RunArtifact<ScalarGrid>,
}

#[pymethods]
impl ScalarRun {
    #[getter]
    fn n_grid(&self) -> usize {
        self.inner.n_grid
    }

    #[getter]
    fn times(&self) -> Vec<f64> {
        self.inner.times()
    }

    #[getter]
    fn cfl_warnings(&self) -> usize {
        self.inner.cfl_warnings
    }

    fn __len__(&self) -> usize {
        self.inner.snapshots.len()
    }

    /// Grid values of snapshot `i`.
    fn values(&self, i: usize) -> PyResult<Vec<f64>> {
        self.inner
            .snapshots
            .get(i)
            .map(|g| g.values.clone())
            .ok_or_else(|| PyValueError::new_err(format!("no snapshot {i}")))
    }

    /// Values at time `t`, linear in time between stored snapshots.
    fn at(&self, t: f64) -> PyResult<Vec<f64>> {
        Ok(self.inner.interpolate_in_time(t).map_err(to_py)?.values)
    }

    fn diagnostics<'py>(&self, py: Python<'py>) -> PyResult<Vec<Bound<'py, PyDict>>> {
        diagnostics_dicts(py, &self.inner.diagnostics)
    }
}

/// Snapshots `(t, u1, u2)` of the N+1-player value functions.
#[pyclass(frozen, module = "mfg")]
struct ValueRun {
    inner: RunArtifact<ValueGrid>,
}

#[pymethods]
impl ValueRun {
    #[getter]
    fn n_grid(&self) -> usize {
        self.inner.n_grid
    }

    #[getter]
    fn times(&self) -> Vec<f64> {
        self.inner.times()
    }

    #[getter]
    fn cfl_warnings(&self) -> usize {
        self.inner.cfl_warnings
    }

    fn __len__(&self) -> usize {
        self.inner.snapshots.len()
    }

    /// `(u1, u2)` of snapshot `i`.
    fn values(&self, i: usize) -> PyResult<(Vec<f64>, Vec<f64>)> {
        self.inner
            .snapshots
            .get(i)
            .map(|g| (g.u1.clone(), g.u2.clone()))
            .ok_or_else(|| PyValueError::new_err(format!("no snapshot {i}")))
    }

    /// The gap `w = u1 - u2` as a scalar run.
    fn w(&self) -> ScalarRun {
        ScalarRun {
            inner: core::w_run(&self.inner),
        }
    }

    fn diagnostics<'py>(&self, py: Python<'py>) -> PyResult<Vec<Bound<'py, PyDict>>> {
        diagnostics_dicts(py, &self.inner.diagnostics)
    }
}

#[pyfunction]
fn solve_nplayer(py: Python<'_>, model: &Model, cfg: &PySolverConfig) -> PyResult<ValueRun> {
    let (m, c) = (model.inner.clone(), cfg.inner.clone());
    let inner = py
        .detach(|| core::solve_nplayer(m.as_ref(), &c))
        .map_err(to_py)?;
    Ok(ValueRun { inner })
}

/// Upsilon run; `c_d` caps the Hamiltonian at the two ends.
#[pyfunction]
#[pyo3(signature = (model, cfg, c_d = None))]
fn solve_hjb(
    py: Python<'_>,
    model: &Model,
    cfg: &PySolverConfig,
    c_d: Option<f64>,
) -> PyResult<ScalarRun> {
    let m = model.inner.clone();
    let mut hc = core::HjConfig::new(cfg.inner.clone());
    if let Some(c) = c_d {
        hc = hc.with_cap(c);
    }
    let inner = py
        .detach(|| core::solve_hjb(m.as_ref(), &hc))
        .map_err(to_py)?;
    Ok(ScalarRun { inner })
}

#[pyfunction]
fn solve_scalar(py: Python<'_>, model: &Model, cfg: &PySolverConfig) -> PyResult<ScalarRun> {
    let (m, c) = (model.inner.clone(), cfg.inner.clone());
    let inner = py
        .detach(|| core::solve_scalar(m.as_ref(), &c))
        .map_err(to_py)?;
    Ok(ScalarRun { inner })
}

/// Density driven by `w_run`; returns the run and a dict of mass diagnostics.
#[pyfunction]
fn solve_density<'py>(
    py: Python<'py>,
    w_run: &ScalarRun,
    cfg: &PySolverConfig,
) -> PyResult<(ScalarRun, Bound<'py, PyDict>)> {
    let c = cfg.inner.clone();
    let out = py
        .detach(|| core::solve_density(&w_run.inner, &c))
        .map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("initial_mass", out.initial_mass)?;
    d.set_item("outflow", out.outflow)?;
    d.set_item("max_mass_drift", out.max_mass_drift)?;
    d.set_item("min_density", out.min_density)?;
    Ok((ScalarRun { inner: out.run }, d))
}

/// `(du1/dt, du2/dt)` of the N+1-player system.
#[pyfunction]
fn rhs_nplayer(model: &Model, u1: Vec<f64>, u2: Vec<f64>) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let grid = ValueGrid::new(0.0, u1, u2).map_err(to_py)?;
    core::rhs_nplayer(&grid, model.inner.as_ref()).map_err(to_py)
}

#[pyfunction]
fn reduced_hamiltonian(p: f64, zeta: f64, model: &Model) -> PyResult<f64> {
    core::reduced_hamiltonian(p, zeta, model.inner.as_ref()).map_err(to_py)
}

#[pyfunction]
fn godunov_flux(alpha: f64, beta: f64, zeta: f64, model: &Model) -> PyResult<f64> {
    core::godunov_flux(alpha, beta, zeta, model.inner.as_ref()).map_err(to_py)
}

/// Centered derivative of Upsilon, one-sided at the ends.
#[pyfunction]
fn derivative_of_upsilon(values: Vec<f64>) -> Vec<f64> {
    core::derivative_of_upsilon(&ScalarGrid::new(0.0, values)).values
}

/// Distance between two grids; `b` is resampled onto `a`'s grid.
///
/// `exclude_radius` drops that many nodes around `a`'s dominant jump.
#[pyfunction]
#[pyo3(signature = (a, b, norm = "l1", exclude_radius = None))]
fn compare_grids(
    a: Vec<f64>,
    b: Vec<f64>,
    norm: &str,
    exclude_radius: Option<usize>,
) -> PyResult<f64> {
    let norm = match norm {
        "l1" => Norm::L1,
        "linf" => Norm::Linf,
        other => return Err(PyValueError::new_err(format!("unknown norm `{other}`"))),
    };
    let excl = exclude_radius.map_or(Exclusion::None, |radius| Exclusion::AroundShock { radius });
    core::compare_grids(
        &ScalarGrid::new(0.0, a),
        &ScalarGrid::new(0.0, b),
        norm,
        excl,
    )
    .map_err(to_py)
}

/// Indices `k` where `|v[k+1] - v[k]|` exceeds `factor` times the median jump.
#[pyfunction]
#[pyo3(signature = (values, factor = DEFAULT_JUMP_FACTOR))]
fn jump_detector(values: Vec<f64>, factor: f64) -> Vec<usize> {
    core::jump_detector(&ScalarGrid::new(0.0, values), factor)
}

/// `zeta` extent of the dominant jump cluster, if any.
#[pyfunction]
#[pyo3(signature = (values, factor = DEFAULT_JUMP_FACTOR))]
fn shock_location(values: Vec<f64>, factor: f64) -> Option<(f64, f64)> {
    dominant_jump(&ScalarGrid::new(0.0, values), factor)
}

#[pyfunction]
fn rankine_hugoniot_residual(
    p_left: f64,
    p_right: f64,
    r_left: f64,
    r_right: f64,
    s_dot: f64,
) -> f64 {
    core::rankine_hugoniot_residual(p_left, p_right, r_left, r_right, s_dot)
}

#[pymodule]
fn mfg(m: &Bound<'_, PyModule>) -> PyResult<()> {
    let py = m.py();
    m.add("MfgError", py.get_type::<MfgError>())?;
    m.add("ConfigError", py.get_type::<ConfigError>())?;
    m.add("NumericalError", py.get_type::<NumericalError>())?;
    m.add_class::<Model>()?;
    m.add_class::<PySolverConfig>()?;
    m.add_class::<ScalarRun>()?;
    m.add_class::<ValueRun>()?;
    m.add_function(wrap_pyfunction!(solve_nplayer, m)?)?;
    m.add_function(wrap_pyfunction!(solve_hjb, m)?)?;
    m.add_function(wrap_pyfunction!(solve_scalar, m)?)?;
    m.add_function(wrap_pyfunction!(solve_density, m)?)?;
    m.add_function(wrap_pyfunction!(rhs_nplayer, m)?)?;
    m.add_function(wrap_pyfunction!(reduced_hamiltonian, m)?)?;
    m.add_function(wrap_pyfunction!(godunov_flux, m)?)?;
    m.add_function(wrap_pyfunction!(derivative_of_upsilon, m)?)?;
    m.add_function(wrap_pyfunction!(compare_grids, m)?)?;
    m.add_function(wrap_pyfunction!(jump_detector, m)?)?;
    m.add_function(wrap_pyfunction!(shock_location, m)?)?;
    m.add_function(wrap_pyfunction!(rankine_hugoniot_residual, m)?)?;
    Ok(())
}
