use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Invalid solver or experiment configuration.
    #[error("configuration error: {0}")]
    Config(String),

    /// A model function produced a non-finite value.
    #[error("domain error: {what} is not finite at zeta = {zeta}")]
    Domain { what: &'static str, zeta: f64 },

    /// The Hamilton-Jacobi path needs a potential pair (F, Psi0).
    #[error("model `{0}` has no potential; the Hamilton-Jacobi solver requires one")]
    MissingPotential(String),

    /// A value exceeded the blow-up bound, which usually means the time step is too large.
    #[error("blow-up at t = {t}: |value| = {magnitude} exceeds bound {bound}")]
    BlowUp { t: f64, magnitude: f64, bound: f64 },

    /// The density scheme produced a negative value beyond rounding.
    #[error("scheme violation at t = {t}: min density {min} below -1e-12")]
    SchemeViolation { t: f64, min: f64 },

    #[error("incompatible runs: {0}")]
    Incompatible(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Short machine-readable category used by the CLI.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Config(_) | Error::MissingPotential(_) => "config",
            Error::Domain { .. } | Error::BlowUp { .. } | Error::SchemeViolation { .. } => {
                "numerical"
            }
            Error::Incompatible(_) => "incompatible",
            Error::Io(_) => "io",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}
