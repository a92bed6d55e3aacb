//! Config-driven experiment pipelines and their CSV outputs.
//!
//! A config is an INI file:
//!
//! ```ini
//! [experiment]
//! model = shock          ; shock | paradigm | consumer
//! solver = nplayer       ; nplayer | hjb | scalar | density | compare
//! out_dir = out
//! plot = false
//!
//! [solver]
//! n_grid = 100
//! dt = 1e-4
//! t_final = 10
//! snapshots = 0, 5, 10   ; or stride:1000, or all
//! threads = 1
//!
//! [paradigm]
//! a1 = 0.5
//! a2 = 0.9
//! r = 0.75
//! ```
//!
//! Further sections: `[hjb] c_d`, `[density] n_grid`, `[paradigm] sign`
//! (`direct` or `negated`), `[consumer] eta, s1, s2, floor`.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use ini::Ini;

use crate::compare::{compare_grids, Exclusion, Norm};
use crate::error::{Error, Result};
use crate::game::SimplexPoint;
use crate::grid::{DiagnosticRow, Execution, ScalarGrid, Snapshots, SolverConfig, ValueGrid};
use crate::hjb::{derivative_of_upsilon, solve_hjb, HjConfig};
use crate::models::{CesParams, IsoParams, ModelChoice, ProductivitySign};
use crate::nplayer::{extract_w, solve_nplayer, solve_nplayer_w};
use crate::shock::{dominant_jump, solve_density, solve_scalar, DEFAULT_JUMP_FACTOR};

/// Cells excluded on each side of the shock in the `compare` pipeline.
pub const COMPARE_EXCLUSION_RADIUS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Shock,
    Paradigm,
    Consumer,
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "shock" => Ok(ModelKind::Shock),
            "paradigm" => Ok(ModelKind::Paradigm),
            "consumer" => Ok(ModelKind::Consumer),
            _ => Err(Error::Config(format!(
                "unknown model `{s}` (expected shock, paradigm or consumer)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverKind {
    NPlayer,
    Hjb,
    Scalar,
    Density,
    Compare,
}

impl SolverKind {
    pub fn name(&self) -> &'static str {
        match self {
            SolverKind::NPlayer => "nplayer",
            SolverKind::Hjb => "hjb",
            SolverKind::Scalar => "scalar",
            SolverKind::Density => "density",
            SolverKind::Compare => "compare",
        }
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SolverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nplayer" => Ok(SolverKind::NPlayer),
            "hjb" => Ok(SolverKind::Hjb),
            "scalar" => Ok(SolverKind::Scalar),
            "density" => Ok(SolverKind::Density),
            "compare" => Ok(SolverKind::Compare),
            _ => Err(Error::Config(format!(
                "unknown solver `{s}` (expected nplayer, hjb, scalar, density or compare)"
            ))),
        }
    }
}

/// Parses `0, 5, 10`, `stride:K` or `all`.
pub fn parse_snapshots(s: &str) -> Result<Snapshots> {
    let s = s.trim();
    if s == "all" {
        return Ok(Snapshots::EveryStep);
    }
    if let Some(k) = s.strip_prefix("stride:") {
        return k
            .trim()
            .parse()
            .map(Snapshots::Stride)
            .map_err(|_| Error::Config(format!("bad snapshot stride `{k}`")));
    }
    let mut times = s
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("bad snapshot time `{t}`")))
        })
        .collect::<Result<Vec<_>>>()?;
    times.sort_by(f64::total_cmp);
    Ok(Snapshots::Times(times))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub model: ModelKind,
    pub solver: SolverKind,
    pub n_grid: usize,
    pub dt: f64,
    pub t_final: f64,
    /// `None` records `t = 0` and `t = T`.
    pub snapshots: Option<Snapshots>,
    pub threads: usize,
    pub c_d: Option<f64>,
    /// Grid of the density solve.
    pub density_grid: usize,
    pub paradigm: CesParams,
    pub paradigm_sign: ProductivitySign,
    pub consumer: IsoParams,
    pub consumer_floor: Option<f64>,
    pub out_dir: PathBuf,
    pub plot: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            model: ModelKind::Shock,
            solver: SolverKind::NPlayer,
            n_grid: 100,
            dt: 1e-4,
            t_final: 10.0,
            snapshots: None,
            threads: 1,
            c_d: None,
            density_grid: 125,
            paradigm: CesParams::REFERENCE,
            paradigm_sign: ProductivitySign::Direct,
            consumer: IsoParams::LOG_UTILITY,
            consumer_floor: None,
            out_dir: PathBuf::from("out"),
            plot: false,
        }
    }
}

/// Command-line values that take precedence over the config file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub model: Option<String>,
    pub solver: Option<String>,
    pub n_grid: Option<usize>,
    pub dt: Option<f64>,
    pub t_final: Option<f64>,
    pub snapshots: Option<String>,
    pub out_dir: Option<PathBuf>,
    pub plot: Option<bool>,
}

fn parse_value<T: FromStr>(section: &str, key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("[{section}] {key}: cannot parse `{value}`")))
}

impl ExperimentConfig {
    pub fn from_ini_str(text: &str) -> Result<Self> {
        let ini = Ini::load_from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let mut cfg = ExperimentConfig::default();
        for (section, props) in ini.iter() {
            let section = section.unwrap_or("experiment");
            for (key, value) in props.iter() {
                cfg.set(section, key, value)?;
            }
        }
        Ok(cfg)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_ini_str(&text)
    }

    fn set(&mut self, section: &str, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match (section, key) {
            ("experiment", "model") => self.model = v.parse()?,
            ("experiment", "solver") => self.solver = v.parse()?,
            ("experiment", "out_dir") => self.out_dir = PathBuf::from(v),
            ("experiment", "plot") => self.plot = parse_value(section, key, v)?,
            ("solver", "n_grid") => self.n_grid = parse_value(section, key, v)?,
            ("solver", "dt") => self.dt = parse_value(section, key, v)?,
            ("solver", "t_final") => self.t_final = parse_value(section, key, v)?,
            ("solver", "snapshots") => self.snapshots = Some(parse_snapshots(v)?),
            ("solver", "threads") => self.threads = parse_value(section, key, v)?,
            ("hjb", "c_d") => self.c_d = Some(parse_value(section, key, v)?),
            ("density", "n_grid") => self.density_grid = parse_value(section, key, v)?,
            ("paradigm", "a1") => self.paradigm.a1 = parse_value(section, key, v)?,
            ("paradigm", "a2") => self.paradigm.a2 = parse_value(section, key, v)?,
            ("paradigm", "r") => self.paradigm.r = parse_value(section, key, v)?,
            ("paradigm", "sign") => {
                self.paradigm_sign = match v {
                    "direct" => ProductivitySign::Direct,
                    "negated" => ProductivitySign::Negated,
                    _ => {
                        return Err(Error::Config(format!(
                            "[paradigm] sign must be direct or negated, got `{v}`"
                        )))
                    }
                }
            }
            ("consumer", "eta") => self.consumer.eta = parse_value(section, key, v)?,
            ("consumer", "s1") => self.consumer.s1 = parse_value(section, key, v)?,
            ("consumer", "s2") => self.consumer.s2 = parse_value(section, key, v)?,
            ("consumer", "floor") => self.consumer_floor = Some(parse_value(section, key, v)?),
            _ => return Err(Error::Config(format!("unknown key `{key}` in [{section}]"))),
        }
        Ok(())
    }

    pub fn apply(&mut self, o: &Overrides) -> Result<()> {
        if let Some(m) = &o.model {
            self.model = m.parse()?;
        }
        if let Some(s) = &o.solver {
            self.solver = s.parse()?;
        }
        if let Some(n) = o.n_grid {
            self.n_grid = n;
        }
        if let Some(dt) = o.dt {
            self.dt = dt;
        }
        if let Some(t) = o.t_final {
            self.t_final = t;
        }
        if let Some(s) = &o.snapshots {
            self.snapshots = Some(parse_snapshots(s)?);
        }
        if let Some(d) = &o.out_dir {
            self.out_dir = d.clone();
        }
        if let Some(p) = o.plot {
            self.plot = p;
        }
        Ok(())
    }

    pub fn model_choice(&self) -> ModelChoice {
        match self.model {
            ModelKind::Shock => ModelChoice::Shock,
            ModelKind::Paradigm => ModelChoice::Paradigm {
                params: self.paradigm,
                sign: self.paradigm_sign,
            },
            ModelKind::Consumer => ModelChoice::Consumer {
                params: self.consumer,
                floor: self.consumer_floor,
            },
        }
    }

    pub fn solver_config(&self) -> SolverConfig {
        let execution = match self.threads {
            0 | 1 => Execution::Serial,
            n => Execution::Threads(n),
        };
        let mut cfg =
            SolverConfig::new(self.n_grid, self.dt, self.t_final).with_execution(execution);
        if let Some(s) = &self.snapshots {
            cfg.snapshots = s.clone();
        }
        cfg
    }

    pub fn validate(&self) -> Result<()> {
        self.solver_config().validate()?;
        let choice = self.model_choice();
        choice.build(self.n_grid)?;
        if matches!(self.solver, SolverKind::Hjb | SolverKind::Compare) && !choice.has_potential() {
            return Err(Error::MissingPotential(choice.name().to_string()));
        }
        if self.density_grid < 2 {
            return Err(Error::Config("[density] n_grid must be >= 2".into()));
        }
        Ok(())
    }
}

/// Files written by [`run_experiment`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExperimentOutput {
    pub files: Vec<PathBuf>,
    pub cfl_warnings: usize,
}

fn fmt_f(x: f64) -> String {
    format!("{x:.16e}")
}

fn zeta_column(n: usize) -> impl Iterator<Item = f64> {
    (0..=n).map(move |k| SimplexPoint::on_grid(k, n).zeta())
}

/// Writes a `(t, zeta, u1, u2)` table.
pub fn write_value_grid(path: &Path, grid: &ValueGrid) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["t", "zeta", "u1", "u2"])?;
    for (k, z) in zeta_column(grid.n()).enumerate() {
        w.write_record([
            fmt_f(grid.t),
            fmt_f(z),
            fmt_f(grid.u1[k]),
            fmt_f(grid.u2[k]),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes a `(t, zeta, value)` table.
pub fn write_scalar_grid(path: &Path, grid: &ScalarGrid) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["t", "zeta", "value"])?;
    for (k, z) in zeta_column(grid.n()).enumerate() {
        w.write_record([fmt_f(grid.t), fmt_f(z), fmt_f(grid.values[k])])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_diagnostics(path: &Path, rows: &[DiagnosticRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "t",
        "mass",
        "max_slope",
        "shock_zeta_min",
        "shock_zeta_max",
        "sign_ok_left",
        "sign_ok_right",
    ])?;
    for r in rows {
        let (lo, hi) = match r.shock_zeta {
            Some((a, b)) => (fmt_f(a), fmt_f(b)),
            None => (String::new(), String::new()),
        };
        w.write_record([
            fmt_f(r.t),
            r.mass.map(fmt_f).unwrap_or_default(),
            fmt_f(r.max_slope),
            lo,
            hi,
            r.sign_ok_left.to_string(),
            r.sign_ok_right.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn read_table(path: &Path, header: &[&str]) -> Result<Vec<Vec<f64>>> {
    let mut r = csv::Reader::from_path(path)?;
    let found: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if found != header {
        return Err(Error::Io(format!(
            "{}: expected columns {header:?}, found {found:?}",
            path.display()
        )));
    }
    r.records()
        .map(|rec| {
            rec?.iter()
                .map(|f| {
                    f.parse::<f64>()
                        .map_err(|_| Error::Io(format!("{}: bad number `{f}`", path.display())))
                })
                .collect()
        })
        .collect()
}

fn single_time(path: &Path, rows: &[Vec<f64>]) -> Result<f64> {
    let t = rows
        .first()
        .map(|r| r[0])
        .ok_or_else(|| Error::Io(format!("{}: empty table", path.display())))?;
    if rows.iter().any(|r| r[0] != t) {
        return Err(Error::Io(format!("{}: mixed time stamps", path.display())));
    }
    Ok(t)
}

/// Reads a table written by [`write_value_grid`].
pub fn read_value_grid(path: &Path) -> Result<ValueGrid> {
    let rows = read_table(path, &["t", "zeta", "u1", "u2"])?;
    let t = single_time(path, &rows)?;
    ValueGrid::new(
        t,
        rows.iter().map(|r| r[2]).collect(),
        rows.iter().map(|r| r[3]).collect(),
    )
}

/// Reads a table written by [`write_scalar_grid`].
pub fn read_scalar_grid(path: &Path) -> Result<ScalarGrid> {
    let rows = read_table(path, &["t", "zeta", "value"])?;
    let t = single_time(path, &rows)?;
    Ok(ScalarGrid::new(t, rows.iter().map(|r| r[2]).collect()))
}

fn snapshot_path(dir: &Path, prefix: &str, i: usize) -> PathBuf {
    dir.join(format!("{prefix}_values_{i:04}.csv"))
}

fn write_scalar_run(
    out: &mut ExperimentOutput,
    dir: &Path,
    prefix: &str,
    snapshots: &[ScalarGrid],
    diagnostics: &[DiagnosticRow],
) -> Result<()> {
    for (i, g) in snapshots.iter().enumerate() {
        let p = snapshot_path(dir, prefix, i);
        write_scalar_grid(&p, g)?;
        out.files.push(p);
    }
    let p = dir.join(format!("{prefix}_diagnostics.csv"));
    write_diagnostics(&p, diagnostics)?;
    out.files.push(p);
    Ok(())
}

fn write_metrics(path: &Path, rows: &[(&str, f64)]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["metric", "value"])?;
    for (k, v) in rows {
        w.write_record([k.to_string(), fmt_f(*v)])?;
    }
    w.flush()?;
    Ok(())
}

/// Runs the configured pipeline and writes its CSV files into `out_dir`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let model = cfg.model_choice().build(cfg.n_grid)?;
    let sc = cfg.solver_config();
    let dir = cfg.out_dir.as_path();
    fs::create_dir_all(dir)?;
    let mut out = ExperimentOutput::default();
    let prefix = cfg.solver.name();

    match cfg.solver {
        SolverKind::NPlayer => {
            let run = solve_nplayer(model.as_ref(), &sc)?;
            out.cfl_warnings = run.cfl_warnings;
            for (i, g) in run.snapshots.iter().enumerate() {
                let p = snapshot_path(dir, prefix, i);
                write_value_grid(&p, g)?;
                out.files.push(p);
            }
            let p = dir.join(format!("{prefix}_diagnostics.csv"));
            write_diagnostics(&p, &run.diagnostics)?;
            out.files.push(p);
        }
        SolverKind::Scalar => {
            let run = solve_scalar(model.as_ref(), &sc)?;
            out.cfl_warnings = run.cfl_warnings;
            write_scalar_run(&mut out, dir, prefix, &run.snapshots, &run.diagnostics)?;
        }
        SolverKind::Hjb => {
            let hj = HjConfig {
                solver: sc,
                c_d: cfg.c_d,
            };
            let run = solve_hjb(model.as_ref(), &hj)?;
            write_scalar_run(&mut out, dir, prefix, &run.snapshots, &run.diagnostics)?;
        }
        SolverKind::Density => {
            let w_cfg = sc.clone().with_snapshots(Snapshots::EveryStep);
            let w_run = solve_nplayer_w(model.as_ref(), &w_cfg)?;
            let mut p_cfg = sc.clone();
            p_cfg.n_grid = cfg.density_grid;
            let dens = solve_density(&w_run, &p_cfg)?;
            out.cfl_warnings = w_run.cfl_warnings;
            write_scalar_run(
                &mut out,
                dir,
                prefix,
                &dens.run.snapshots,
                &dens.run.diagnostics,
            )?;
            let p = dir.join("density_summary.csv");
            write_metrics(
                &p,
                &[
                    ("initial_mass", dens.initial_mass),
                    ("outflow", dens.outflow),
                    ("max_mass_drift", dens.max_mass_drift),
                    ("min_density", dens.min_density),
                ],
            )?;
            out.files.push(p);
        }
        SolverKind::Compare => {
            let c_cfg = sc.clone().with_snapshots(Snapshots::Times(vec![0.0]));
            let np = solve_nplayer(model.as_ref(), &c_cfg)?;
            out.cfl_warnings = np.cfl_warnings;
            let hj = solve_hjb(
                model.as_ref(),
                &HjConfig {
                    solver: c_cfg,
                    c_d: cfg.c_d,
                },
            )?;
            let w = extract_w(&np.snapshots[0]);
            let dups = derivative_of_upsilon(&hj.snapshots[0]);

            let p = dir.join("compare.csv");
            let mut wr = csv::Writer::from_path(&p)?;
            wr.write_record(["zeta", "w_nplayer", "dupsilon"])?;
            for (k, z) in zeta_column(w.n()).enumerate() {
                wr.write_record([fmt_f(z), fmt_f(w.values[k]), fmt_f(dups.values[k])])?;
            }
            wr.flush()?;
            out.files.push(p);

            let excl = Exclusion::AroundShock {
                radius: COMPARE_EXCLUSION_RADIUS,
            };
            let centre = |g: &ScalarGrid| {
                dominant_jump(g, DEFAULT_JUMP_FACTOR).map_or(f64::NAN, |(a, b)| 0.5 * (a + b))
            };
            let p = dir.join("compare_metrics.csv");
            write_metrics(
                &p,
                &[
                    (
                        "l1_excluding_shock",
                        compare_grids(&w, &dups, Norm::L1, excl)?,
                    ),
                    (
                        "linf_excluding_shock",
                        compare_grids(&w, &dups, Norm::Linf, excl)?,
                    ),
                    (
                        "l1_all",
                        compare_grids(&w, &dups, Norm::L1, Exclusion::None)?,
                    ),
                    ("shock_zeta_nplayer", centre(&w)),
                    ("shock_zeta_hjb", centre(&dups)),
                ],
            )?;
            out.files.push(p);
        }
    }
    Ok(out)
}
