//! Planar geometry: points, polygons, boundary curves, cut cells and surface maps.

mod curve;
mod cut;
pub mod point;
pub mod polygon;
mod surface;

pub use curve::BoundaryCurve;
pub use cut::{classify_and_clip, BoundaryRule, CellKind, CutCell, TrimmedDomain, AREA_FLOOR};
pub use point::{BoundingBox, Point};
pub use polygon::Polygon;
pub use surface::{Metric, SurfaceMap};
