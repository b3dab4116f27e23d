use thiserror::Error;

/// Errors produced by the solvers, the simulator and the scenario harness.
#[derive(Error, Debug)]
pub enum Error {
    /// The endpoints are at least one cable length apart; no hanging curve exists.
    #[error("cable is taut: {0}")]
    TautCable(String),
    /// An argument is outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// The geometry makes a linear coefficient vanish.
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),
    /// Desired thrust direction parallel to the heading vector.
    #[error("degenerate attitude: thrust direction parallel to heading")]
    DegenerateAttitude,
    /// The minimum-snap constraint system is rank-deficient.
    #[error("singular minimum-snap system: {0}")]
    SingularQp(String),
    /// A state component left the representable range.
    #[error("numerical divergence at t = {time:.4} s: {detail}")]
    NumericalDivergence { time: f64, detail: String },
    #[error("unknown scenario '{0}'")]
    UnknownScenario(String),
    #[error("statistics window is empty")]
    EmptyWindow,
    #[error("unknown channel '{name}', valid channels: {}", valid.join(", "))]
    Channel { name: String, valid: Vec<String> },
    /// Invalid scenario or trace content.
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
