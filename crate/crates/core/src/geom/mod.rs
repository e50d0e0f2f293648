//! Geometry kernel: disks clipped to a convex polygon, booleans of
//! arc-bounded regions with disks and half-planes, and integrals over the
//! resulting regions.
//!
//! All values are immutable once built and all operations are pure.

pub mod boolean;
pub mod curve;
pub mod integrate;
pub mod point;
pub mod polygon;
pub mod quadrature;
pub mod region;

use thiserror::Error;

pub use boolean::{boolean, clip_disk_to_polygon, region_boolean, BoolOp, HalfPlane, Primitive};
pub use curve::{circle_circle_intersection, Arc, Curve, Disk, Orientation, Segment};
pub use integrate::{
    boundary_line_integral, curve_integral, grid_integrate, region_area_integral,
    region_area_integral_with, region_moments, BoundarySample, GridEstimate,
    QuadratureConfig, Quantity, RegionMoments,
};
pub use point::{BBox, Point2, Vec2};
pub use polygon::ConvexPolygon;
pub use quadrature::GaussLegendre;
pub use region::{ArcRegion, BoundaryPiece, Label, NodeId};

/// Absolute snapping tolerance for intersection and tangency decisions, in meters.
pub const EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeomError {
    #[error("circles coincide")]
    DegenerateOverlap,
    #[error("invalid disk radius {radius}")]
    InvalidDisk { radius: f64 },
    #[error("invalid polygon: {0}")]
    InvalidPolygon(String),
}
