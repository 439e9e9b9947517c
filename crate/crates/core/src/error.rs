use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("quadrature did not converge (estimated error {estimate:e}, tolerance {tolerance:e})")]
    Quadrature { estimate: f64, tolerance: f64 },

    #[error("no root of h^2 = n log h with h > sqrt(e) for n = {0}")]
    NoRoot(f64),

    #[error("iteration did not converge: {0}")]
    NonConvergence(String),

    #[error("frequency out of range: 1 - phi(t) = {u} >= 1 at t = {t}")]
    FrequencyOutOfRange { t: f64, u: f64 },

    #[error("characteristic function envelope {envelope:e} at t_max = {t_max} exceeds {tolerance:e}; enlarge the grid")]
    EnvelopeNotDecayed {
        t_max: f64,
        envelope: f64,
        tolerance: f64,
    },

    #[error("estimated tail mass {mass:e} beyond x_max = {x_max} exceeds {tolerance:e}; enlarge x_max")]
    TailMass {
        x_max: f64,
        mass: f64,
        tolerance: f64,
    },

    #[error("invalid grid: {0}")]
    Grid(String),

    #[error("negative density ringing {0:e} exceeds tolerance")]
    Ringing(f64),

    #[error("calibration missing: {0}")]
    CalibrationMissing(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
