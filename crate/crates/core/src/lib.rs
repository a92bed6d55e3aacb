//! Solvers for two-state finite-state mean field games.
//!
//! The N+1-player equilibrium system ([`nplayer`]) defines the solution; a
//! Godunov Hamilton-Jacobi solver ([`hjb`]) validates it for potential games,
//! and [`shock`] studies the scalar reduction `w = U1 - U2`, the density it
//! transports, and the shocks it develops.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod compare;
pub mod error;
pub mod experiment;
pub mod game;
pub mod grid;
pub mod hjb;
pub mod models;
pub mod nplayer;
pub mod shock;

pub use compare::{compare_grids, compare_runs, Exclusion, Norm};
pub use error::{Error, Result};
pub use experiment::{run_experiment, ExperimentConfig, ExperimentOutput, Overrides, SolverKind};
pub use game::{
    drift_g, hamiltonian_h, optimal_rate, positive_part, FnModel, ModelSpec, Potential,
    SimplexPoint, State, ValuePair,
};
pub use grid::{
    DiagnosticRow, Execution, RunArtifact, ScalarGrid, Snapshots, SolverConfig, ValueGrid,
};
pub use hjb::{derivative_of_upsilon, godunov_flux, reduced_hamiltonian, solve_hjb, HjConfig};
pub use models::{
    consumer_model, paradigm_model, shock_model, CesParams, IsoParams, ModelChoice,
    ProductivitySign,
};
pub use nplayer::{extract_w, rhs_nplayer, solve_nplayer, solve_nplayer_w, w_run};
pub use shock::{
    advection_coefficient, jump_detector, max_slope_series, rankine_hugoniot_residual,
    scalar_source, sign_condition_check, solve_density, solve_scalar, DensityRun, ShockCurve,
};
