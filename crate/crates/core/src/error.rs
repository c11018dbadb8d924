use thiserror::Error;

/// Errors raised by model construction, simulation and analysis.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("field `{0}` must be positive")]
    NonPositiveField(&'static str),
    #[error("field `{0}` is outside its allowed fraction range")]
    FractionOutOfRange(&'static str),
    #[error("field `{0}` is not finite")]
    NonFinite(&'static str),
    #[error("drive current {current} A is outside [0, {max}] A")]
    CurrentOutOfRange { current: f64, max: f64 },
    #[error("time {t} s is outside the drive program [0, {t_end}] s")]
    TimeOutOfRange { t: f64, t_end: f64 },
    #[error("invalid drive: {0}")]
    InvalidDrive(String),
    #[error("air temperature rise {0} K is at or below absolute zero")]
    NonPhysicalTemperature(f64),
    #[error("root bracketing failed: {0}")]
    NoConvergence(String),
    #[error("simulation config: {0}")]
    Config(String),
    #[error("unknown parameter path `{0}`")]
    UnknownParameter(String),
    #[error("trace channel is empty")]
    EmptyTrace,
    #[error("trace too short: {0}")]
    TooShort(String),
    #[error("regression input must be positive, got {0}")]
    NonPositiveValue(f64),
    #[error("all abscissae are equal")]
    DegenerateX,
    #[error("series is not an exponential decay: {0}")]
    NotDecaying(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
