use thiserror::Error;

/// Errors raised by construction, simulation and IO.
#[derive(Debug, Error)]
pub enum Error {
    #[error("input error: {0}")]
    Input(String),

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("resource limit exceeded: {what} (limit {limit}, reached at least {reached})")]
    Resource {
        what: String,
        limit: u64,
        reached: u64,
    },

    #[error("invalid machine: {0}")]
    Machine(String),

    #[error("machine did not halt within {0} steps")]
    Budget(u64),

    #[error("border reconstruction failed: {0}")]
    Reconstruction(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Node cap for materialized constructions, overridable through `LOCDEC_MAX_NODES`.
pub fn node_cap() -> u64 {
    std::env::var("LOCDEC_MAX_NODES")
        .ok()
        .and_then(|s| s.parse().ok())
        .filter(|&n| n > 0)
        .unwrap_or(1 << 24)
}

/// Cap on enumerated fragments, overridable through `LOCDEC_MAX_FRAGMENTS`.
pub fn fragment_cap() -> u64 {
    std::env::var("LOCDEC_MAX_FRAGMENTS")
        .ok()
        .and_then(|s| s.parse().ok())
        .filter(|&n| n > 0)
        .unwrap_or(1 << 20)
}
