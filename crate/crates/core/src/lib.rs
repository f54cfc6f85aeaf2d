//! Resource placement for LEO satellite edge computing.
//!
//! A shell of `N` orbital planes with `M` satellites each, linked in the +GRID
//! pattern, forms an `N x M` torus whose hop lengths follow from orbital
//! geometry. This crate computes those hop lengths ([`geom`]), places resource
//! nodes so that every satellite reaches one within a hop or distance bound
//! ([`torus`], [`wplace`]), and checks placements by propagating the shell and
//! measuring shortest-path distances over time ([`orbitsim`]). The [`cli`]
//! module backs the `leoplace` binary.

pub mod cli;
mod error;
pub mod geom;
pub mod orbitsim;
pub mod torus;
pub mod wplace;

pub use error::{Error, Result};
pub use geom::{HopWeights, MetricKind, PhysicalConstants, ShellParams};
pub use torus::{Assignment, Dims, DiscretePlacement, TorusCoord};
pub use wplace::{Placement, SloSpec, WeightedPlacement};
