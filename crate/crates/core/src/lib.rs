//! Monte Carlo laboratory for planar Poisson–Voronoi percolation.
//!
//! The crate samples intensity-one Poisson environments with independent
//! colourings, builds the exact Voronoi tessellation, and decides crossing,
//! arm and pivotality events on region-clipped cell complexes. The
//! [`estimators`] module turns those events into Monte Carlo estimates with
//! deterministic, addressable seeding.

pub mod arms;
pub mod connectivity;
pub mod error;
pub mod estimators;
pub mod geometry;
pub mod pivotal;
pub mod randomness;
pub mod sampling;
pub mod scalar;
mod unionfind;

pub use error::{Error, EventError, GeometryError, SamplingError};
pub use scalar::Scalar;

/// Planar point in the working precision of the tessellation.
pub type Point = geometry::point::Point2<f64>;
/// Axis-aligned rectangle in the working precision.
pub type Rect = geometry::point::Rect<f64>;
pub type HalfPlane = geometry::polygon::HalfPlane<f64>;

/// Version of this library.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub type Result<T, E = Error> = std::result::Result<T, E>;
