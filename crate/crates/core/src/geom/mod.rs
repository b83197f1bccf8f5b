//! Rendering construction sequences to truncated signed-distance grids.

mod body;
mod csg;
mod grid;
mod profile;
mod render;
mod surface;
pub(crate) mod vec;

use thiserror::Error;

pub use body::body_sdf;
pub use csg::{sdf_difference, sdf_intersection, sdf_union};
pub use grid::{GridSpec, TsdfGrid};
pub use profile::{loop_sdf, profile_sdf};
pub use render::{attribute, render, render_attributed, render_pair, AttributionGrid};
pub use surface::{surface_points, PointSet};


#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum GeomError {
    #[error("loop has a zero-length chain")]
    DegenerateLoop,
    #[error("extrusion has zero extent")]
    ZeroExtent,
    #[error("rendered occupancy is empty")]
    RenderInvalid,
    #[error("grid has no sign change")]
    EmptySurface,
    #[error("invalid grid spec: {0}")]
    InvalidSpec(&'static str),
}
