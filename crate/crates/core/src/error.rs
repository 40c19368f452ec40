use thiserror::Error;

/// Errors produced by the simulation and reconstruction pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid geometry: {field}: {reason}")]
    Geometry { field: &'static str, reason: String },

    #[error("invalid pump profile: {0}")]
    Pump(String),

    #[error("pump vanishes at every slit evaluation point; the two-photon state is null")]
    NullState,

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("cannot project the zero matrix onto the state space")]
    ZeroMatrix,

    #[error("quadrature did not converge within {nodes} nodes (best estimate {re:e}{im:+e}i)")]
    Quadrature { re: f64, im: f64, nodes: usize },

    #[error("measurement settings are degenerate: rank {rank} < 16")]
    DegenerateSettings { rank: usize },

    #[error("incomplete count record: {0}")]
    IncompleteRecord(String),

    #[error("record is not on the standard detection positions: {0}")]
    NonStandardSettings(String),

    #[error("{0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
