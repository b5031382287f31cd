//! Planar geometry for printing domains.
//!
//! All lengths are millimetres. Sample lattices are axis aligned and
//! anchored at the bounding-box minimum corner of the domain they cover.

mod grid;
mod island;
mod polygon;
mod segment;
mod voronoi;

use core::ops::{Add, Mul, Neg, Sub};

pub(crate) use grid::knn_into;
pub use grid::{knn_candidates, sample_uniform, sample_uniform_with, SampleGrid, SamplingOptions};
pub use island::{island_of, island_partition, Island, IslandGrid};
pub use polygon::{clip_half_plane, polygon_area, polygon_centroid, BoundingBox, PolygonDomain};
pub use segment::{segments_intersect, Segment};
pub use voronoi::{default_seeds, voronoi_partition, VoronoiCell, VoronoiPartition};

use crate::math;

/// Default point-on-boundary tolerance in millimetres.
pub const BOUNDARY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GeometryError {
    #[error("polygon needs at least 3 vertices, got {0}")]
    TooFewVertices(usize),
    #[error("polygon has zero area")]
    ZeroArea,
    #[error("polygon edges {0} and {1} intersect")]
    SelfIntersection(usize, usize),
    #[error("non-finite coordinate in polygon")]
    NonFinite,
    #[error("hatch spacing must be positive, got {0}")]
    InvalidHatch(f64),
    #[error("degenerate domain: no lattice points at hatch {hatch} mm (extent {width} x {height} mm)")]
    DegenerateDomain { hatch: f64, width: f64, height: f64 },
    #[error("zero-length direction vector")]
    ZeroVector,
    #[error("duplicate Voronoi seed at ({0}, {1})")]
    DuplicateSeed(f64, f64),
    #[error("Voronoi seed ({0}, {1}) lies outside the island")]
    SeedOutside(f64, f64),
    #[error("at least one Voronoi seed is required")]
    NoSeeds,
    #[error("island size must be positive, got {0}")]
    InvalidIslandSize(f64),
}

/// A point (or vector) in the build plane.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, o: Point2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn cross(self, o: Point2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        math::hypot(self.x, self.y)
    }

    pub fn dist(self, o: Point2) -> f64 {
        (self - o).norm()
    }

    pub fn dist_sq(self, o: Point2) -> f64 {
        let d = self - o;
        d.dot(d)
    }

    /// Unit vector in the same direction, `None` for the zero vector.
    pub fn normalized(self) -> Option<Point2> {
        let n = self.norm();
        if n > 0.0 && n.is_finite() {
            Some(self * (1.0 / n))
        } else {
            None
        }
    }

    pub fn midpoint(self, o: Point2) -> Point2 {
        Point2::new(0.5 * (self.x + o.x), 0.5 * (self.y + o.y))
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, o: Point2) -> Point2 {
        Point2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, o: Point2) -> Point2 {
        Point2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point2 {
    type Output = Point2;
    fn mul(self, s: f64) -> Point2 {
        Point2::new(self.x * s, self.y * s)
    }
}

impl Neg for Point2 {
    type Output = Point2;
    fn neg(self) -> Point2 {
        Point2::new(-self.x, -self.y)
    }
}

/// Turning angle at a path vertex, in degrees within `[0, 180]`.
///
/// Measured between the reversed incoming direction and the outgoing
/// direction: a straight continuation gives 180, a full reversal gives 0.
pub fn turning_angle(incoming: Point2, outgoing: Point2) -> Result<f64, GeometryError> {
    let back = incoming.normalized().ok_or(GeometryError::ZeroVector)?;
    let out = outgoing.normalized().ok_or(GeometryError::ZeroVector)?;
    let back = -back;
    let angle = math::atan2(back.cross(out).abs(), back.dot(out));
    Ok(math::to_degrees(angle).clamp(0.0, 180.0))
}
