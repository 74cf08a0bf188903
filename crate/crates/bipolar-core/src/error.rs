use thiserror::Error;

/// Errors produced by grid construction, initial-condition building,
/// propagation, and the run workflows.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(
        "packet overlaps grid edge: |psi| at edge is {edge_fraction:.3e} of peak \
         (limit {limit:.1e})"
    )]
    PacketOverlapsEdge { edge_fraction: f64, limit: f64 },

    #[error(
        "inadmissible initial packet: discarded momentum probability {discarded:.3e} \
         exceeds {limit:.3e}"
    )]
    InadmissiblePacket { discarded: f64, limit: f64 },

    #[error("state has {state_surfaces} surfaces but potential has {potential_surfaces}")]
    ShapeMismatch {
        state_surfaces: usize,
        potential_surfaces: usize,
    },

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("instability: component norm {norm:.3e} exceeds {limit} at t = {t}")]
    Unstable { t: f64, norm: f64, limit: f64 },

    #[error(
        "splice plan violated: run totals differ by {max_diff:.3e} at snapshot {snapshot} \
         (limit {limit:.1e})"
    )]
    SpliceMismatch {
        snapshot: usize,
        max_diff: f64,
        limit: f64,
    },

    #[error(
        "oracle wraparound contamination: edge density {edge_fraction:.3e} of max at t = {t}"
    )]
    OracleEdgeContamination { t: f64, edge_fraction: f64 },

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
