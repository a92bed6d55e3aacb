//! Two-state game primitives shared by every solver: the quadratic-cost
//! Hamiltonian, the optimal switching rates and the mean-field drift.
//!
//! States are labelled 1 and 2. A population distribution is
//! `theta = (zeta, 1 - zeta)`, where `zeta` is the fraction of players in state 1.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// `max(x, 0)`. Returns `+0.0` at `x = 0`.
#[inline]
pub fn positive_part(x: f64) -> f64 {
    if x > 0.0 {
        x
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum State {
    One,
    Two,
}

impl State {
    pub fn other(self) -> State {
        match self {
            State::One => State::Two,
            State::Two => State::One,
        }
    }

    pub fn index(self) -> usize {
        match self {
            State::One => 1,
            State::Two => 2,
        }
    }

    pub fn from_index(i: usize) -> Option<State> {
        match i {
            1 => Some(State::One),
            2 => Some(State::Two),
            _ => None,
        }
    }
}

impl fmt::Display for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.index())
    }
}

/// A point `theta = (theta1, theta2)` of the two-state simplex.
///
/// Both coordinates are stored so that grid points can carry
/// `theta2 = (N - k) / N` exactly instead of `1 - k / N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimplexPoint {
    theta1: f64,
    theta2: f64,
}

impl SimplexPoint {
    pub fn new(zeta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&zeta) {
            return Err(Error::Config(format!("zeta = {zeta} outside [0, 1]")));
        }
        Ok(SimplexPoint {
            theta1: zeta,
            theta2: 1.0 - zeta,
        })
    }

    /// Grid point `zeta_k = k / N`.
    pub fn on_grid(k: usize, n: usize) -> Self {
        debug_assert!(k <= n && n > 0);
        let nf = n as f64;
        SimplexPoint {
            theta1: k as f64 / nf,
            theta2: (n - k) as f64 / nf,
        }
    }

    #[inline]
    pub fn zeta(&self) -> f64 {
        self.theta1
    }

    #[inline]
    pub fn theta1(&self) -> f64 {
        self.theta1
    }

    #[inline]
    pub fn theta2(&self) -> f64 {
        self.theta2
    }

    #[inline]
    pub fn theta(&self, state: State) -> f64 {
        match state {
            State::One => self.theta1,
            State::Two => self.theta2,
        }
    }
}

/// Values `(u1, u2)` of a player in state 1 and state 2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValuePair {
    pub u1: f64,
    pub u2: f64,
}

impl ValuePair {
    pub fn new(u1: f64, u2: f64) -> Self {
        ValuePair { u1, u2 }
    }

    #[inline]
    pub fn get(&self, state: State) -> f64 {
        match state {
            State::One => self.u1,
            State::Two => self.u2,
        }
    }

    /// `z^i - z^j` with `j` the other state.
    #[inline]
    pub fn gap(&self, state: State) -> f64 {
        match state {
            State::One => self.u1 - self.u2,
            State::Two => self.u2 - self.u1,
        }
    }
}

/// Potential pair of a potential game: `f(i, theta) = dF/dtheta_i`.
///
/// Both functions take raw coordinates so that partial derivatives can be
/// taken off the simplex.
pub trait Potential: Send + Sync {
    /// `F(theta1, theta2)`.
    fn value(&self, theta1: f64, theta2: f64) -> f64;
    /// `Psi0(theta1, theta2)`, the terminal potential.
    fn terminal(&self, theta1: f64, theta2: f64) -> f64;
}

/// A two-state game: running-cost coupling `f(i, theta)`, terminal values
/// `psi(i, theta)`, and an optional potential pair.
pub trait ModelSpec: Send + Sync {
    fn name(&self) -> &str;

    /// Coupling term `f(i, theta)` of the running cost.
    fn coupling(&self, state: State, theta: SimplexPoint) -> f64;

    /// Terminal value `psi(i, theta)` at `t = T`.
    fn terminal(&self, state: State, theta: SimplexPoint) -> f64;

    fn potential(&self) -> Option<&dyn Potential> {
        None
    }
}

type PointFn = dyn Fn(State, SimplexPoint) -> f64 + Send + Sync;
type CoordFn = dyn Fn(f64, f64) -> f64 + Send + Sync;

/// Closure-backed model, handy for tests and ad-hoc experiments.
#[derive(Clone)]
pub struct FnModel {
    name: String,
    coupling: Arc<PointFn>,
    terminal: Arc<PointFn>,
    potential: Option<FnPotential>,
}

#[derive(Clone)]
struct FnPotential {
    value: Arc<CoordFn>,
    terminal: Arc<CoordFn>,
}

impl Potential for FnPotential {
    fn value(&self, theta1: f64, theta2: f64) -> f64 {
        (self.value)(theta1, theta2)
    }

    fn terminal(&self, theta1: f64, theta2: f64) -> f64 {
        (self.terminal)(theta1, theta2)
    }
}

impl FnModel {
    pub fn new<C, T>(name: impl Into<String>, coupling: C, terminal: T) -> Self
    where
        C: Fn(State, SimplexPoint) -> f64 + Send + Sync + 'static,
        T: Fn(State, SimplexPoint) -> f64 + Send + Sync + 'static,
    {
        FnModel {
            name: name.into(),
            coupling: Arc::new(coupling),
            terminal: Arc::new(terminal),
            potential: None,
        }
    }

    pub fn with_potential<F, P>(mut self, value: F, terminal: P) -> Self
    where
        F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
        P: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        self.potential = Some(FnPotential {
            value: Arc::new(value),
            terminal: Arc::new(terminal),
        });
        self
    }
}

impl fmt::Debug for FnModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnModel")
            .field("name", &self.name)
            .field("potential", &self.potential.is_some())
            .finish()
    }
}

impl ModelSpec for FnModel {
    fn name(&self) -> &str {
        &self.name
    }

    fn coupling(&self, state: State, theta: SimplexPoint) -> f64 {
        (self.coupling)(state, theta)
    }

    fn terminal(&self, state: State, theta: SimplexPoint) -> f64 {
        (self.terminal)(state, theta)
    }

    fn potential(&self) -> Option<&dyn Potential> {
        self.potential.as_ref().map(|p| p as &dyn Potential)
    }
}

/// Quadratic switching-cost Hamiltonian given an already evaluated coupling
/// value: `f - ((z^i - z^j)^+)^2 / 2`.
#[inline]
pub fn hamiltonian_with_coupling(z: ValuePair, state: State, coupling: f64) -> f64 {
    let gap = positive_part(z.gap(state));
    coupling - 0.5 * (gap * gap)
}

/// `h(z, theta, i) = f(i, theta) - ((z^i - z^j)^+)^2 / 2`.
pub fn hamiltonian_h(
    z: ValuePair,
    theta: SimplexPoint,
    state: State,
    model: &(impl ModelSpec + ?Sized),
) -> Result<f64> {
    let f = model.coupling(state, theta);
    if !f.is_finite() {
        return Err(Error::Domain {
            what: "coupling f",
            zeta: theta.zeta(),
        });
    }
    Ok(hamiltonian_with_coupling(z, state, f))
}

/// Optimal switching-rate vector `(alpha_1, alpha_2)` for a player in `state`.
///
/// The off-diagonal entry is the rate of leaving; the diagonal entry is its
/// negative so the components sum to zero.
#[inline]
pub fn optimal_rate(z: ValuePair, _theta: SimplexPoint, state: State) -> [f64; 2] {
    let leave = positive_part(z.gap(state));
    match state {
        State::One => [-leave, leave],
        State::Two => [leave, -leave],
    }
}

/// First component `g1` of the mean-field drift; `g2 = -g1`.
#[inline]
pub fn drift_g(u: ValuePair, theta: SimplexPoint) -> f64 {
    -theta.theta1() * positive_part(u.u1 - u.u2) + theta.theta2() * positive_part(u.u2 - u.u1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn shock_like() -> FnModel {
        FnModel::new(
            "shock-like",
            |s, th| match s {
                State::One => 1.0 - th.theta1(),
                State::Two => th.theta1(),
            },
            |s, th| th.theta(s) - 0.5,
        )
    }

    fn half() -> SimplexPoint {
        SimplexPoint::new(0.5).unwrap()
    }

    #[test]
    fn hamiltonian_examples() {
        let m = shock_like();
        let h = hamiltonian_h(ValuePair::new(1.0, 0.0), half(), State::One, &m).unwrap();
        assert_eq!(h, 0.0);
        let h = hamiltonian_h(ValuePair::new(0.0, 1.0), half(), State::One, &m).unwrap();
        assert_eq!(h, 0.5);
        for c in [-3.0, 0.0, 2.5] {
            for s in [State::One, State::Two] {
                let th = SimplexPoint::new(0.3).unwrap();
                let h = hamiltonian_h(ValuePair::new(c, c), th, s, &m).unwrap();
                assert_eq!(h, m.coupling(s, th));
            }
        }
    }

    #[test]
    fn hamiltonian_reports_divergent_coupling() {
        let m = FnModel::new("log", |_, th| th.theta1().ln(), |_, _| 0.0);
        let th = SimplexPoint::new(0.0).unwrap();
        let err = hamiltonian_h(ValuePair::new(0.0, 0.0), th, State::One, &m).unwrap_err();
        assert!(matches!(err, Error::Domain { .. }));
    }

    #[test]
    fn optimal_rate_examples() {
        let th = half();
        assert_eq!(
            optimal_rate(ValuePair::new(2.0, 1.0), th, State::One),
            [-1.0, 1.0]
        );
        assert_eq!(
            optimal_rate(ValuePair::new(1.0, 2.0), th, State::One),
            [0.0, 0.0]
        );
        assert_eq!(
            optimal_rate(ValuePair::new(1.0, 2.0), th, State::Two),
            [1.0, -1.0]
        );
    }

    #[test]
    fn drift_examples() {
        assert_eq!(drift_g(ValuePair::new(1.0, 0.0), half()), -0.5);
        assert_eq!(
            drift_g(ValuePair::new(0.7, 0.7), SimplexPoint::new(0.2).unwrap()),
            0.0
        );
        assert_eq!(
            drift_g(ValuePair::new(0.0, 1.0), SimplexPoint::new(1.0).unwrap()),
            0.0
        );
    }

    #[test]
    fn simplex_point_rejects_out_of_range() {
        assert!(SimplexPoint::new(-0.01).is_err());
        assert!(SimplexPoint::new(1.01).is_err());
        let p = SimplexPoint::on_grid(3, 10);
        assert_eq!(p.theta2(), 0.7);
    }

    #[test]
    fn positive_part_at_zero_is_zero() {
        assert_eq!(positive_part(0.0), 0.0);
        assert_eq!(positive_part(-0.0), 0.0);
    }

    fn finite() -> impl Strategy<Value = f64> {
        -50.0..50.0f64
    }

    proptest! {
        #[test]
        fn rates_sum_to_zero(z1 in finite(), z2 in finite(), zeta in 0.0..=1.0f64, two in any::<bool>()) {
            let s = if two { State::Two } else { State::One };
            let a = optimal_rate(ValuePair::new(z1, z2), SimplexPoint::new(zeta).unwrap(), s);
            prop_assert_eq!(a[0] + a[1], 0.0);
            let off = match s { State::One => a[1], State::Two => a[0] };
            prop_assert!(off >= 0.0);
        }

        #[test]
        fn hamiltonian_depends_on_difference_only(
            z1 in finite(), z2 in finite(), c in finite(), zeta in 0.0..=1.0f64, two in any::<bool>()
        ) {
            let m = shock_like();
            let s = if two { State::Two } else { State::One };
            let th = SimplexPoint::new(zeta).unwrap();
            let a = hamiltonian_h(ValuePair::new(z1, z2), th, s, &m).unwrap();
            let b = hamiltonian_h(ValuePair::new(z1 + c, z2 + c), th, s, &m).unwrap();
            // shifting both entries perturbs the difference only by rounding
            prop_assert!((a - b).abs() <= 1e-9 * (1.0 + a.abs()));
        }

        #[test]
        fn drift_is_antisymmetric(z1 in finite(), z2 in finite(), zeta in 0.0..=1.0f64) {
            let th = SimplexPoint::new(zeta).unwrap();
            let g1 = drift_g(ValuePair::new(z1, z2), th);
            // g2 from its own definition: sum_i theta_i alpha*_2(U, theta, i)
            let u = ValuePair::new(z1, z2);
            let g2 = th.theta1() * optimal_rate(u, th, State::One)[1]
                + th.theta2() * optimal_rate(u, th, State::Two)[1];
            prop_assert!((g1 + g2).abs() <= 1e-12 * (1.0 + g1.abs()));
        }

        #[test]
        fn off_diagonal_rate_is_derivative_of_h(
            z1 in finite(), z2 in finite(), zeta in 0.0..=1.0f64, two in any::<bool>()
        ) {
            prop_assume!((z1 - z2).abs() > 1e-3);
            let m = shock_like();
            let s = if two { State::Two } else { State::One };
            let th = SimplexPoint::new(zeta).unwrap();
            let eps = 1e-6;
            // perturb the other coordinate z^j
            let (plus, minus) = match s {
                State::One => (ValuePair::new(z1, z2 + eps), ValuePair::new(z1, z2 - eps)),
                State::Two => (ValuePair::new(z1 + eps, z2), ValuePair::new(z1 - eps, z2)),
            };
            let d = (hamiltonian_h(plus, th, s, &m).unwrap() - hamiltonian_h(minus, th, s, &m).unwrap()) / (2.0 * eps);
            let a = optimal_rate(ValuePair::new(z1, z2), th, s);
            let off = match s { State::One => a[1], State::Two => a[0] };
            prop_assert!((d - off).abs() <= 1e-5 * (1.0 + off.abs()), "fd {} vs rate {}", d, off);
        }
    }
}
