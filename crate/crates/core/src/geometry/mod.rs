//! Planar geometry: points, labelled convex clipping, exact predicates, the
//! Delaunay/Voronoi tessellation and region-clipped cell complexes.

pub mod complex;
pub mod delaunay;
pub mod grid;
pub mod point;
pub mod polygon;
pub mod predicates;
pub mod region;
pub mod tessellation;

/// Two contacts are "of positive length" when they overlap by more than this.
pub const CONTACT_EPS: f64 = 1e-9;
/// Absolute snap tolerance for coordinates after exact-predicate filtering.
pub const SNAP_EPS: f64 = 1e-12;
/// Clipped fragments with smaller area are dropped.
pub const AREA_EPS: f64 = 1e-12;
