use thiserror::Error;

/// Errors raised by the corridor model, the planners, and the simulator.
#[derive(Debug, Error)]
pub enum Error {
    /// Route geometry or speed-limit data is unusable.
    #[error("invalid route: {0}")]
    InvalidRoute(String),

    /// The ego position is at or beyond the end of the route.
    #[error("horizon exhausted: ego at {position} m, route ends at {route_end} m")]
    HorizonExhausted { position: f64, route_end: f64 },

    /// A signal schedule admits no usable green phase.
    #[error("infeasible SPaT at signal {signal}: {reason}")]
    InfeasibleSpat { signal: usize, reason: String },

    /// A green window collapsed to the empty set.
    #[error("infeasible green window at intersection {index}: min {t_min:.3} > max {t_max:.3}")]
    InfeasibleWindow { index: usize, t_min: f64, t_max: f64 },

    /// The outer travel-time optimization has an empty feasible set.
    #[error("infeasible plan: {0}")]
    InfeasiblePlan(String),

    /// A numeric argument violated a precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A linear solve or optimizer failed.
    #[error("solver error: {0}")]
    Solver(String),

    /// Scenario file could not be parsed.
    #[error("scenario parse error: {0}")]
    Parse(String),

    /// Scenario parsed but is semantically invalid.
    #[error("scenario validation error: {0}")]
    Validation(String),

    /// Simulation exceeded its time ceiling.
    #[error("simulation timed out at t = {t:.1} s")]
    Timeout { t: f64 },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
