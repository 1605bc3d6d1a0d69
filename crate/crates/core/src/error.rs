use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// The analytic post-cavity packets only exist once the classical
    /// transit is over.
    #[error("time {t} precedes the transit time {transit}; analytic packets are valid only for t >= T")]
    BeforeTransit { t: f64, transit: f64 },

    #[error("phase is undefined at t = 0")]
    ZeroTime,

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid truncates the wave packet: tail mass {mass:e} exceeds {limit:e}")]
    Truncated { mass: f64, limit: f64 },

    #[error("norm drift {drift:e} exceeds {limit:e}; time step too large")]
    NormDrift { drift: f64, limit: f64 },

    #[error("invalid optimizer bounds: {0}")]
    InvalidBounds(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
