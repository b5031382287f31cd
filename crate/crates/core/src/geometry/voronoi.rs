use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::polygon::{clip_half_plane, polygon_area, polygon_centroid};
use super::{GeometryError, Point2, PolygonDomain, BOUNDARY_TOLERANCE};

/// One Voronoi cell clipped to its island.
#[derive(Debug, Clone, PartialEq)]
pub struct VoronoiCell {
    pub seed: Point2,
    pub label: String,
    /// Cell ring; empty when the clipped cell has no area.
    pub ring: Vec<Point2>,
}

impl VoronoiCell {
    pub fn area(&self) -> f64 {
        polygon_area(&self.ring).abs()
    }

    pub fn centroid(&self) -> Point2 {
        polygon_centroid(&self.ring)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VoronoiPartition {
    pub seeds: Vec<Point2>,
    pub cells: Vec<VoronoiCell>,
}

impl VoronoiPartition {
    /// Index of the cell owning `p`: the nearest seed, lowest index on ties.
    pub fn owner(&self, p: Point2) -> usize {
        nearest_seed(&self.seeds, p)
    }
}

pub(crate) fn nearest_seed(seeds: &[Point2], p: Point2) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (k, s) in seeds.iter().enumerate() {
        let d = s.dist_sq(p);
        if d < best_d {
            best_d = d;
            best = k;
        }
    }
    best
}

/// Voronoi diagram of `seeds` restricted to `island`.
///
/// Each cell is the island clipped by the bisector half-planes against every
/// other seed. Cells are labelled `B1..Bk` in seed order.
pub fn voronoi_partition(island: &PolygonDomain, seeds: &[Point2]) -> Result<VoronoiPartition, GeometryError> {
    if seeds.is_empty() {
        return Err(GeometryError::NoSeeds);
    }
    for (k, s) in seeds.iter().enumerate() {
        if !island.contains(*s, BOUNDARY_TOLERANCE.max(1e-9 * island.max_length())) {
            return Err(GeometryError::SeedOutside(s.x, s.y));
        }
        if seeds[..k].iter().any(|o| o.dist_sq(*s) < 1e-24) {
            return Err(GeometryError::DuplicateSeed(s.x, s.y));
        }
    }
    let cells = seeds
        .iter()
        .enumerate()
        .map(|(k, &seed)| {
            let mut ring = island.vertices().to_vec();
            for (m, &other) in seeds.iter().enumerate() {
                if m == k || ring.is_empty() {
                    continue;
                }
                ring = clip_half_plane(&ring, seed.midpoint(other), other - seed);
            }
            if ring.len() < 3 || polygon_area(&ring).abs() < 1e-18 {
                ring.clear();
            }
            VoronoiCell { seed, label: format!("B{}", k + 1), ring }
        })
        .collect();
    Ok(VoronoiPartition { seeds: seeds.to_vec(), cells })
}

/// The island's bounding-box corners followed by `random` uniform points
/// inside it, drawn from a generator seeded with `rng_seed`.
pub fn default_seeds(island: &PolygonDomain, random: usize, rng_seed: u64) -> Vec<Point2> {
    let bb = island.bbox();
    let mut seeds: Vec<Point2> = bb
        .corners()
        .into_iter()
        .filter(|c| island.contains(*c, 1e-9))
        .collect();
    let target = seeds.len() + random;
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut attempts = 0;
    while seeds.len() < target && attempts < 10_000 {
        attempts += 1;
        let p = Point2::new(
            rng.random_range(bb.min.x..=bb.max.x),
            rng.random_range(bb.min.y..=bb.max.y),
        );
        if island.contains(p, 0.0) && seeds.iter().all(|s| s.dist_sq(p) > 1e-12) {
            seeds.push(p);
        }
    }
    seeds
}
