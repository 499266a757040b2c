use thiserror::Error;

/// Errors raised by the analysis modules.
///
/// Every variant maps to a stable token (see [`Error::token`]) which the
/// command-line front end prints on the diagnostic stream.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("point ({x}, {t}) lies outside the field domain")]
    OutOfDomain { x: f64, t: f64 },

    #[error("stencil for d^{p_t}/dt d^{q_x}/dx at node ({i}, {j}) crosses the grid boundary")]
    StencilClipped { i: usize, j: usize, p_t: usize, q_x: usize },

    #[error("order {order} exceeds the supported maximum {max}")]
    OrderTooHigh { order: usize, max: usize },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("field has {found} zero crossings at t = {t}, at least 3 required")]
    NotOscillatory { t: f64, found: usize },

    #[error("seed misses the attribute: |residual| = {residual:e} exceeds {tolerance:e}")]
    SeedOffAttribute { residual: f64, tolerance: f64 },

    #[error("phase velocity is undefined at the seed ({x}, {t})")]
    SingularSeed { x: f64, t: f64 },

    #[error("no sign change of the attribute residual within [{lo}, {hi}]")]
    NoBracket { lo: f64, hi: f64 },

    #[error("trajectory spans no time interval")]
    DegenerateTrajectory,

    #[error("denominator vanishes: {0}")]
    DegenerateDenominator(String),

    #[error("local velocity has a pole at x = {x} between the endpoints")]
    PoleOnPath { x: f64 },

    #[error("logarithm argument {0} is not positive")]
    NonpositiveLogArgument(f64),

    #[error("interval has zero length")]
    DegenerateInterval,

    #[error("CFL number {ratio} exceeds 1")]
    CflViolation { ratio: f64 },

    #[error("solution exceeded {limit:e} at step {step}")]
    NonfiniteBlowup { step: usize, limit: f64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Stable machine-readable name of the error kind.
    pub fn token(&self) -> &'static str {
        match self {
            Error::OutOfDomain { .. } => "OutOfDomain",
            Error::StencilClipped { .. } => "StencilClipped",
            Error::OrderTooHigh { .. } => "OrderTooHigh",
            Error::InvalidGrid(_) => "InvalidGrid",
            Error::InvalidParameter(_) => "InvalidParameter",
            Error::NotOscillatory { .. } => "NotOscillatory",
            Error::SeedOffAttribute { .. } => "SeedOffAttribute",
            Error::SingularSeed { .. } => "SingularSeed",
            Error::NoBracket { .. } => "NoBracket",
            Error::DegenerateTrajectory => "DegenerateTrajectory",
            Error::DegenerateDenominator(_) => "DegenerateDenominator",
            Error::PoleOnPath { .. } => "PoleOnPath",
            Error::NonpositiveLogArgument(_) => "NonpositiveLogArgument",
            Error::DegenerateInterval => "DegenerateInterval",
            Error::CflViolation { .. } => "CFLViolation",
            Error::NonfiniteBlowup { .. } => "NonfiniteBlowup",
            Error::Parse(_) => "ParseError",
            Error::Io(_) => "IoError",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
