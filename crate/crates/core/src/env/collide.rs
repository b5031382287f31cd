use alloc::vec::Vec;

use crate::geometry::{segments_intersect, BoundingBox, Point2, Segment};
use crate::math;

/// True iff the move `from -> to` meets any of `melted` other than at a
/// shared endpoint.
pub fn detect_collision(melted: &[Segment], from: Point2, to: Point2) -> bool {
    let s = Segment::new(from, to, true);
    melted.iter().any(|m| segments_intersect(&s, m))
}

/// Laser-on segments bucketed on a uniform grid for crossing queries.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentIndex {
    origin: Point2,
    cell: f64,
    nx: usize,
    ny: usize,
    cells: Vec<Vec<u32>>,
    touched: Vec<u32>,
    segments: Vec<Segment>,
}

impl SegmentIndex {
    /// Index covering `bounds` with cells of edge `cell`; segments outside
    /// the bounds are clamped into the border cells.
    pub fn new(bounds: BoundingBox, cell: f64) -> Self {
        let nx = (math::floor(bounds.width() / cell) as usize + 1).max(1);
        let ny = (math::floor(bounds.height() / cell) as usize + 1).max(1);
        Self {
            origin: bounds.min,
            cell,
            nx,
            ny,
            cells: alloc::vec![Vec::new(); nx * ny],
            touched: Vec::new(),
            segments: Vec::new(),
        }
    }

    pub fn clear(&mut self) {
        for &c in &self.touched {
            self.cells[c as usize].clear();
        }
        self.touched.clear();
        self.segments.clear();
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    fn cell_range(&self, s: &Segment) -> (usize, usize, usize, usize) {
        let clamp = |v: f64, n: usize| (math::floor(v).max(0.0) as usize).min(n - 1);
        let pad = 1e-9 * self.cell;
        let i0 = clamp((s.a.x.min(s.b.x) - pad - self.origin.x) / self.cell, self.nx);
        let i1 = clamp((s.a.x.max(s.b.x) + pad - self.origin.x) / self.cell, self.nx);
        let j0 = clamp((s.a.y.min(s.b.y) - pad - self.origin.y) / self.cell, self.ny);
        let j1 = clamp((s.a.y.max(s.b.y) + pad - self.origin.y) / self.cell, self.ny);
        (i0, i1, j0, j1)
    }

    pub fn insert(&mut self, s: Segment) {
        let id = self.segments.len() as u32;
        self.segments.push(s);
        let (i0, i1, j0, j1) = self.cell_range(&s);
        for j in j0..=j1 {
            for i in i0..=i1 {
                let c = j * self.nx + i;
                if self.cells[c].is_empty() {
                    self.touched.push(c as u32);
                }
                self.cells[c].push(id);
            }
        }
    }

    /// True iff `from -> to` meets an indexed segment other than at a
    /// shared endpoint.
    pub fn crosses(&self, from: Point2, to: Point2) -> bool {
        let s = Segment::new(from, to, true);
        let (i0, i1, j0, j1) = self.cell_range(&s);
        for j in j0..=j1 {
            for i in i0..=i1 {
                for &id in &self.cells[j * self.nx + i] {
                    if segments_intersect(&s, &self.segments[id as usize]) {
                        return true;
                    }
                }
            }
        }
        false
    }
}
