//! The three socio-economic models: shock formation, paradigm shift and
//! consumer choice.

use crate::error::{Error, Result};
use crate::game::{ModelSpec, Potential, SimplexPoint, State};

/// Shock formation: `f(1, theta) = 1 - theta1`, `f(2, theta) = theta1`, terminal
/// `psi(i, theta) = theta_i - 1/2`. A potential game with `F = theta1 * theta2`.
#[derive(Debug, Clone, Copy, Default)]
pub struct ShockModel;

pub fn shock_model() -> ShockModel {
    ShockModel
}

impl ModelSpec for ShockModel {
    fn name(&self) -> &str {
        "shock"
    }

    fn coupling(&self, state: State, theta: SimplexPoint) -> f64 {
        match state {
            State::One => 1.0 - theta.theta1(),
            State::Two => theta.theta1(),
        }
    }

    fn terminal(&self, state: State, theta: SimplexPoint) -> f64 {
        theta.theta(state) - 0.5
    }

    fn potential(&self) -> Option<&dyn Potential> {
        Some(self)
    }
}

impl Potential for ShockModel {
    fn value(&self, theta1: f64, theta2: f64) -> f64 {
        theta1 * theta2
    }

    fn terminal(&self, theta1: f64, theta2: f64) -> f64 {
        0.5 * (theta1 - 0.5).powi(2) + 0.5 * (theta2 - 0.5).powi(2)
    }
}

/// Constant-elasticity-of-substitution productivity parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CesParams {
    pub a1: f64,
    pub a2: f64,
    /// Elasticity of substitution, nonzero.
    pub r: f64,
}

impl CesParams {
    /// `a1 = 1/2`, `a2 = 9/10`, `r = 3/4`.
    pub const REFERENCE: CesParams = CesParams {
        a1: 0.5,
        a2: 0.9,
        r: 0.75,
    };

    pub fn validate(&self) -> Result<()> {
        for (name, a) in [("a1", self.a1), ("a2", self.a2)] {
            if !(0.0..=1.0).contains(&a) {
                return Err(Error::Config(format!("{name} = {a} outside [0, 1]")));
            }
        }
        if self.r == 0.0 || !self.r.is_finite() {
            return Err(Error::Config(format!(
                "r must be finite and nonzero, got {}",
                self.r
            )));
        }
        Ok(())
    }
}

/// How productivity enters the running cost.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ProductivitySign {
    /// The productivity itself is the coupling term.
    #[default]
    Direct,
    /// The coupling term is minus the productivity.
    Negated,
}

/// Paradigm shift. Terminal `psi(1) = 1 - theta1`, `psi(2) = theta2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParadigmModel {
    pub params: CesParams,
    pub sign: ProductivitySign,
}

pub fn paradigm_model(params: CesParams) -> Result<ParadigmModel> {
    params.validate()?;
    Ok(ParadigmModel {
        params,
        sign: ProductivitySign::Direct,
    })
}

impl ParadigmModel {
    pub fn with_sign(mut self, sign: ProductivitySign) -> Self {
        self.sign = sign;
        self
    }

    /// CES productivity of a researcher working on paradigm `state`.
    pub fn productivity(&self, state: State, theta: SimplexPoint) -> f64 {
        let CesParams { a1, a2, r } = self.params;
        match state {
            State::One => {
                let t1 = theta.theta1();
                (a1 * t1.powf(r) + (1.0 - a1) * (1.0 - t1).powf(r)).powf(1.0 / r)
            }
            State::Two => {
                let t2 = theta.theta2();
                (a2 * (1.0 - t2).powf(r) + (1.0 - a2) * t2.powf(r)).powf(1.0 / r)
            }
        }
    }
}

impl ModelSpec for ParadigmModel {
    fn name(&self) -> &str {
        "paradigm"
    }

    fn coupling(&self, state: State, theta: SimplexPoint) -> f64 {
        let p = self.productivity(state, theta);
        match self.sign {
            ProductivitySign::Direct => p,
            ProductivitySign::Negated => -p,
        }
    }

    fn terminal(&self, state: State, theta: SimplexPoint) -> f64 {
        match state {
            State::One => 1.0 - theta.theta1(),
            State::Two => theta.theta2(),
        }
    }
}

/// Isoelastic utility parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsoParams {
    pub eta: f64,
    pub s1: f64,
    pub s2: f64,
}

impl IsoParams {
    /// `eta = 0.5`, `s1 = 0.075`, `s2 = 0.1`.
    pub const SQRT_UTILITY: IsoParams = IsoParams {
        eta: 0.5,
        s1: 0.075,
        s2: 0.1,
    };
    /// `eta = 1`, `s1 = 0.1`, `s2 = 0.075`.
    pub const LOG_UTILITY: IsoParams = IsoParams {
        eta: 1.0,
        s1: 0.1,
        s2: 0.075,
    };

    pub fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return Err(Error::Config(format!(
                "eta must be positive, got {}",
                self.eta
            )));
        }
        if !(self.s1 >= 0.0 && self.s2 >= 0.0) {
            return Err(Error::Config(
                "minimum prices s1, s2 must be nonnegative".into(),
            ));
        }
        Ok(())
    }
}

/// `(x^(1 - eta) - 1) / (1 - eta)`, or `ln x` at `eta = 1`.
pub fn isoelastic(x: f64, eta: f64) -> f64 {
    if eta == 1.0 {
        x.ln()
    } else {
        (x.powf(1.0 - eta) - 1.0) / (1.0 - eta)
    }
}

/// Consumer choice. Terminal `psi(1) = 1 - theta1`, `psi(2) = theta2`.
///
/// The utility is singular at `theta_i = 0` for `eta >= 1`; fractions are
/// clamped to `[floor, 1]` before evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConsumerModel {
    pub params: IsoParams,
    pub floor: f64,
}

/// Consumer model with the clamp floor `1 / (10 N)` for an `N`-interval grid.
pub fn consumer_model(params: IsoParams, n_grid: usize) -> Result<ConsumerModel> {
    params.validate()?;
    if n_grid == 0 {
        return Err(Error::Config("n_grid must be positive".into()));
    }
    Ok(ConsumerModel {
        params,
        floor: 1.0 / (10.0 * n_grid as f64),
    })
}

impl ConsumerModel {
    pub fn with_floor(mut self, floor: f64) -> Self {
        self.floor = floor;
        self
    }

    pub fn utility(&self, state: State, theta: SimplexPoint) -> f64 {
        let s = match state {
            State::One => self.params.s1,
            State::Two => self.params.s2,
        };
        let x = theta.theta(state).clamp(self.floor, 1.0);
        isoelastic(x, self.params.eta) + s
    }
}

impl ModelSpec for ConsumerModel {
    fn name(&self) -> &str {
        "consumer"
    }

    fn coupling(&self, state: State, theta: SimplexPoint) -> f64 {
        self.utility(state, theta)
    }

    fn terminal(&self, state: State, theta: SimplexPoint) -> f64 {
        match state {
            State::One => 1.0 - theta.theta1(),
            State::Two => theta.theta2(),
        }
    }
}

/// Model selection with its parameter block, as read from a config file.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelChoice {
    Shock,
    Paradigm {
        params: CesParams,
        sign: ProductivitySign,
    },
    Consumer {
        params: IsoParams,
        floor: Option<f64>,
    },
}

impl ModelChoice {
    pub fn name(&self) -> &'static str {
        match self {
            ModelChoice::Shock => "shock",
            ModelChoice::Paradigm { .. } => "paradigm",
            ModelChoice::Consumer { .. } => "consumer",
        }
    }

    pub fn has_potential(&self) -> bool {
        matches!(self, ModelChoice::Shock)
    }

    pub fn build(&self, n_grid: usize) -> Result<Box<dyn ModelSpec>> {
        Ok(match *self {
            ModelChoice::Shock => Box::new(shock_model()),
            ModelChoice::Paradigm { params, sign } => {
                Box::new(paradigm_model(params)?.with_sign(sign))
            }
            ModelChoice::Consumer { params, floor } => {
                let m = consumer_model(params, n_grid)?;
                match floor {
                    Some(eps) if eps > 0.0 && eps < 1.0 => Box::new(m.with_floor(eps)),
                    Some(eps) => {
                        return Err(Error::Config(format!("clamp floor {eps} outside (0, 1)")))
                    }
                    None => Box::new(m),
                }
            }
        })
    }
}
