use alloc::vec;
use alloc::vec::Vec;

use super::{BoundingBox, GeometryError, Point2, PolygonDomain, BOUNDARY_TOLERANCE};
use crate::math;

/// Options for [`sample_uniform_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplingOptions {
    /// Lattice anchor; defaults to the domain's bounding-box minimum.
    pub anchor: Option<Point2>,
    /// Boundary tolerance (mm) for keeping lattice points.
    pub tolerance: f64,
}

impl Default for SamplingOptions {
    fn default() -> Self {
        Self { anchor: None, tolerance: BOUNDARY_TOLERANCE }
    }
}

const EMPTY: u32 = u32::MAX;

/// Dense lookup from lattice coordinates to point indices.
#[derive(Debug, Clone, PartialEq)]
struct LatticeIndex {
    i0: i64,
    j0: i64,
    nx: usize,
    ny: usize,
    slots: Vec<u32>,
}

impl LatticeIndex {
    fn build(coords: &[(i64, i64)]) -> Self {
        if coords.is_empty() {
            return Self { i0: 0, j0: 0, nx: 0, ny: 0, slots: Vec::new() };
        }
        let (mut i0, mut j0, mut i1, mut j1) = (i64::MAX, i64::MAX, i64::MIN, i64::MIN);
        for &(i, j) in coords {
            i0 = i0.min(i);
            j0 = j0.min(j);
            i1 = i1.max(i);
            j1 = j1.max(j);
        }
        let nx = (i1 - i0 + 1) as usize;
        let ny = (j1 - j0 + 1) as usize;
        let mut slots = vec![EMPTY; nx * ny];
        for (k, &(i, j)) in coords.iter().enumerate() {
            slots[(j - j0) as usize * nx + (i - i0) as usize] = k as u32;
        }
        Self { i0, j0, nx, ny, slots }
    }

    fn get(&self, i: i64, j: i64) -> Option<usize> {
        let (di, dj) = (i - self.i0, j - self.j0);
        if di < 0 || dj < 0 || di as usize >= self.nx || dj as usize >= self.ny {
            return None;
        }
        match self.slots[dj as usize * self.nx + di as usize] {
            EMPTY => None,
            k => Some(k as usize),
        }
    }
}

/// Uniformly sampled points of a printing domain.
///
/// Points sit on an axis-aligned lattice of pitch `hatch` (mm) and are
/// stored row-major: increasing `y`, then increasing `x`. The `visited`
/// flags and `collisions` counters are the mutable scan state the
/// environment works on.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleGrid {
    hatch: f64,
    origin: Point2,
    points: Vec<Point2>,
    coords: Vec<(i64, i64)>,
    index: LatticeIndex,
    bbox: BoundingBox,
    domain: Option<PolygonDomain>,
    pub visited: Vec<bool>,
    pub collisions: Vec<u32>,
}

impl SampleGrid {
    /// Grid from explicit lattice coordinates, sorted into row-major order.
    ///
    /// Duplicate coordinates are collapsed.
    pub fn from_lattice(
        hatch: f64,
        origin: Point2,
        mut coords: Vec<(i64, i64)>,
        domain: Option<PolygonDomain>,
    ) -> Result<Self, GeometryError> {
        if !(hatch > 0.0 && hatch.is_finite()) {
            return Err(GeometryError::InvalidHatch(hatch));
        }
        coords.sort_by_key(|&(i, j)| (j, i));
        coords.dedup();
        let points: Vec<Point2> = coords
            .iter()
            .map(|&(i, j)| Point2::new(origin.x + i as f64 * hatch, origin.y + j as f64 * hatch))
            .collect();
        let bbox = BoundingBox::of(&points).ok_or(GeometryError::DegenerateDomain {
            hatch,
            width: 0.0,
            height: 0.0,
        })?;
        let index = LatticeIndex::build(&coords);
        let n = points.len();
        Ok(Self {
            hatch,
            origin,
            points,
            coords,
            index,
            bbox,
            domain,
            visited: vec![false; n],
            collisions: vec![0; n],
        })
    }

    /// Sub-grid made of the given point indices (same lattice and anchor).
    pub fn subset(&self, indices: &[usize], domain: Option<PolygonDomain>) -> Result<Self, GeometryError> {
        let coords = indices.iter().map(|&k| self.coords[k]).collect();
        Self::from_lattice(self.hatch, self.origin, coords, domain)
    }

    pub fn hatch(&self) -> f64 {
        self.hatch
    }

    pub fn hatch_um(&self) -> f64 {
        self.hatch * 1000.0
    }

    pub fn origin(&self) -> Point2 {
        self.origin
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point2] {
        &self.points
    }

    pub fn point(&self, k: usize) -> Point2 {
        self.points[k]
    }

    pub fn coords(&self, k: usize) -> (i64, i64) {
        self.coords[k]
    }

    pub fn lattice_coords(&self) -> &[(i64, i64)] {
        &self.coords
    }

    /// Index of the point at lattice position `(i, j)`, if sampled.
    pub fn index_of(&self, i: i64, j: i64) -> Option<usize> {
        self.index.get(i, j)
    }

    pub fn bbox(&self) -> BoundingBox {
        self.bbox
    }

    pub fn domain(&self) -> Option<&PolygonDomain> {
        self.domain.as_ref()
    }

    /// Longest admissible jump for nearest-point fallback moves.
    pub fn max_length(&self) -> f64 {
        let diag = math::hypot(self.bbox.width(), self.bbox.height());
        match &self.domain {
            Some(d) => d.max_length().max(diag),
            None => diag,
        }
    }

    pub fn unvisited_count(&self) -> usize {
        self.visited.iter().filter(|v| !**v).count()
    }

    /// Clear the visited flags; collision counters persist.
    pub fn reset_visits(&mut self) {
        self.visited.iter_mut().for_each(|v| *v = false);
    }

    pub fn reset_collisions(&mut self) {
        self.collisions.iter_mut().for_each(|c| *c = 0);
    }
}

/// Sample the domain on a lattice of pitch `h` anchored at its bbox minimum.
pub fn sample_uniform(domain: &PolygonDomain, h: f64) -> Result<SampleGrid, GeometryError> {
    sample_uniform_with(domain, h, SamplingOptions::default())
}

pub fn sample_uniform_with(
    domain: &PolygonDomain,
    h: f64,
    opts: SamplingOptions,
) -> Result<SampleGrid, GeometryError> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(GeometryError::InvalidHatch(h));
    }
    let bb = domain.bbox();
    let (width, height) = (bb.width(), bb.height());
    let degenerate = GeometryError::DegenerateDomain { hatch: h, width, height };
    let slack = opts.tolerance.max(1e-12 * h);
    if width + slack < h || height + slack < h {
        return Err(degenerate);
    }
    let origin = opts.anchor.unwrap_or(bb.min);
    let i_lo = math::ceil((bb.min.x - origin.x - slack) / h) as i64;
    let i_hi = math::floor((bb.max.x - origin.x + slack) / h) as i64;
    let j_lo = math::ceil((bb.min.y - origin.y - slack) / h) as i64;
    let j_hi = math::floor((bb.max.y - origin.y + slack) / h) as i64;
    let mut coords = Vec::new();
    for j in j_lo..=j_hi {
        for i in i_lo..=i_hi {
            let p = Point2::new(origin.x + i as f64 * h, origin.y + j as f64 * h);
            if domain.contains(p, opts.tolerance) {
                coords.push((i, j));
            }
        }
    }
    if coords.is_empty() {
        return Err(degenerate);
    }
    SampleGrid::from_lattice(h, origin, coords, Some(domain.clone()))
}

/// All grid points within `radius` of `center`, excluding the center itself,
/// in ascending index order.
pub fn knn_candidates(grid: &SampleGrid, center: usize, radius: f64) -> Vec<usize> {
    let mut out = Vec::with_capacity(8);
    knn_into(grid, center, radius, &mut out);
    out
}

pub(crate) fn knn_into(grid: &SampleGrid, center: usize, radius: f64, out: &mut Vec<usize>) {
    out.clear();
    let h = grid.hatch();
    let reach = math::floor(radius / h + 1e-9) as i64;
    let (ci, cj) = grid.coords(center);
    let lim = radius * (1.0 + 1e-9);
    let c = grid.point(center);
    for dj in -reach..=reach {
        for di in -reach..=reach {
            if di == 0 && dj == 0 {
                continue;
            }
            if let Some(k) = grid.index_of(ci + di, cj + dj) {
                if grid.point(k).dist(c) <= lim {
                    out.push(k);
                }
            }
        }
    }
    out.sort_unstable();
}
