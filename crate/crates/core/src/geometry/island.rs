use alloc::vec::Vec;

use super::polygon::{polygon_area, polygon_centroid};
use super::{BoundingBox, GeometryError, Point2, PolygonDomain};
use crate::math;

/// One square island cell clipped to the domain.
#[derive(Debug, Clone, PartialEq)]
pub struct Island {
    /// Column and row of the island in the island lattice.
    pub col: usize,
    pub row: usize,
    /// The unclipped square.
    pub cell: BoundingBox,
    /// The square clipped to the domain.
    pub ring: Vec<Point2>,
    pub centroid: Point2,
}

impl Island {
    pub fn area(&self) -> f64 {
        polygon_area(&self.ring).abs()
    }

    /// The clipped island as a domain polygon.
    pub fn polygon(&self) -> Result<PolygonDomain, GeometryError> {
        PolygonDomain::new(self.ring.clone())
    }
}

/// Square islands covering a domain, in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct IslandGrid {
    pub size: f64,
    pub origin: Point2,
    pub cols: usize,
    pub rows: usize,
    pub islands: Vec<Island>,
}

impl IslandGrid {
    pub fn len(&self) -> usize {
        self.islands.len()
    }

    pub fn is_empty(&self) -> bool {
        self.islands.is_empty()
    }

    pub fn centroids(&self) -> Vec<Point2> {
        self.islands.iter().map(|i| i.centroid).collect()
    }

    /// Position of the island at `(col, row)` in `islands`, if non-empty.
    pub fn find(&self, col: usize, row: usize) -> Option<usize> {
        self.islands.iter().position(|i| i.col == col && i.row == row)
    }
}

/// Column/row of the island owning `p`, half-open except on the far edges.
pub fn island_of(origin: Point2, size: f64, cols: usize, rows: usize, p: Point2) -> (usize, usize) {
    let slot = |v: f64, n: usize| {
        let k = math::floor(v / size + 1e-9);
        (k.max(0.0) as usize).min(n.saturating_sub(1))
    };
    (slot(p.x - origin.x, cols), slot(p.y - origin.y, rows))
}

/// Cover the domain with `size x size` squares anchored at its bbox minimum
/// and clip them to the domain. Squares that miss the domain are dropped.
pub fn island_partition(domain: &PolygonDomain, size: f64) -> Result<IslandGrid, GeometryError> {
    if !(size > 0.0 && size.is_finite()) {
        return Err(GeometryError::InvalidIslandSize(size));
    }
    let bb = domain.bbox();
    let count = |extent: f64| (math::ceil(extent / size - 1e-9) as usize).max(1);
    let (cols, rows) = (count(bb.width()), count(bb.height()));
    let mut islands = Vec::new();
    for row in 0..rows {
        for col in 0..cols {
            let min = Point2::new(bb.min.x + col as f64 * size, bb.min.y + row as f64 * size);
            let cell = BoundingBox { min, max: Point2::new(min.x + size, min.y + size) };
            let ring = domain.clip_to_box(&cell);
            if ring.len() < 3 || polygon_area(&ring).abs() < 1e-12 * size * size {
                continue;
            }
            let centroid = polygon_centroid(&ring);
            islands.push(Island { col, row, cell, ring, centroid });
        }
    }
    Ok(IslandGrid { size, origin: bb.min, cols, rows, islands })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thirty_mm_plate_has_36_islands() {
        let plate = PolygonDomain::rectangle(0.0, 0.0, 30.0, 30.0).unwrap();
        let grid = island_partition(&plate, 5.0).unwrap();
        assert_eq!(grid.len(), 36);
        assert!(grid.islands.iter().all(|i| (i.area() - 25.0).abs() < 1e-9));
    }

    #[test]
    fn exact_fit_gives_one_island() {
        let sq = PolygonDomain::rectangle(0.0, 0.0, 5.0, 5.0).unwrap();
        assert_eq!(island_partition(&sq, 5.0).unwrap().len(), 1);
    }

    #[test]
    fn overhang_is_clipped() {
        let r = PolygonDomain::rectangle(0.0, 0.0, 7.0, 5.0).unwrap();
        let grid = island_partition(&r, 5.0).unwrap();
        assert_eq!(grid.len(), 2);
        assert!((grid.islands[0].area() - 25.0).abs() < 1e-9);
        assert!((grid.islands[1].area() - 10.0).abs() < 1e-9);
        let c = grid.islands[1].centroid;
        assert!((c.x - 6.0).abs() < 1e-9 && (c.y - 2.5).abs() < 1e-9);
    }

    #[test]
    fn island_lookup_is_half_open() {
        let o = Point2::new(0.0, 0.0);
        assert_eq!(island_of(o, 5.0, 2, 1, Point2::new(4.99, 1.0)), (0, 0));
        assert_eq!(island_of(o, 5.0, 2, 1, Point2::new(5.0, 1.0)), (1, 0));
        assert_eq!(island_of(o, 5.0, 2, 1, Point2::new(10.0, 5.0)), (1, 0));
    }

    #[test]
    fn invalid_size() {
        let sq = PolygonDomain::rectangle(0.0, 0.0, 5.0, 5.0).unwrap();
        assert!(island_partition(&sq, 0.0).is_err());
    }
}
