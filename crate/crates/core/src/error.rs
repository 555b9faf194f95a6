use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("out of regime: success probability {value} exceeds 1")]
    OutOfRegime { value: f64 },
    #[error("epsilon {epsilon} is below the achievable floor {floor}")]
    Unachievable { epsilon: f64, floor: f64 },
    #[error("window side {window} is below the guard {guard}")]
    DegenerateWindow { window: f64, guard: f64 },
    #[error("numeric failure: {0}")]
    NoConvergence(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("no grid point meets epsilon {0}")]
    NoneFound(f64),
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
