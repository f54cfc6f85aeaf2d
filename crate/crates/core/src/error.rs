use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// The shell has no link along the requested axis (fewer than two planes
    /// or fewer than two satellites per plane).
    #[error("no {axis} link: the shell has {count} {axis} node(s), at least 2 are needed")]
    NoSuchLink { axis: &'static str, count: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("instance too large for exhaustive search: {nodes} nodes (limit {limit})")]
    Capacity { nodes: usize, limit: usize },

    #[error(
        "placement leaves node ({plane}, {slot}) at {distance} from its resource, bound is {bound}"
    )]
    CoverageViolation {
        plane: usize,
        slot: usize,
        distance: f64,
        bound: f64,
    },
}
