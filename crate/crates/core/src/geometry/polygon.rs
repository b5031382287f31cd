use alloc::vec::Vec;

use super::{segments_intersect, GeometryError, Point2, Segment};

/// Axis-aligned bounding box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundingBox {
    pub min: Point2,
    pub max: Point2,
}

impl BoundingBox {
    pub fn of(points: &[Point2]) -> Option<Self> {
        let first = *points.first()?;
        let mut bb = BoundingBox { min: first, max: first };
        for p in &points[1..] {
            bb.min.x = bb.min.x.min(p.x);
            bb.min.y = bb.min.y.min(p.y);
            bb.max.x = bb.max.x.max(p.x);
            bb.max.y = bb.max.y.max(p.y);
        }
        Some(bb)
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }

    pub fn corners(&self) -> [Point2; 4] {
        [
            self.min,
            Point2::new(self.max.x, self.min.y),
            self.max,
            Point2::new(self.min.x, self.max.y),
        ]
    }
}

/// Signed shoelace area (positive for counter-clockwise rings).
pub fn polygon_area(vertices: &[Point2]) -> f64 {
    let n = vertices.len();
    if n < 3 {
        return 0.0;
    }
    let mut acc = 0.0;
    for i in 0..n {
        acc += vertices[i].cross(vertices[(i + 1) % n]);
    }
    0.5 * acc
}

/// Area centroid; falls back to the vertex mean for degenerate rings.
pub fn polygon_centroid(vertices: &[Point2]) -> Point2 {
    let n = vertices.len();
    let area = polygon_area(vertices);
    if n == 0 {
        return Point2::default();
    }
    if area.abs() < 1e-18 {
        let s = vertices.iter().fold(Point2::default(), |acc, &p| acc + p);
        return s * (1.0 / n as f64);
    }
    let (mut cx, mut cy) = (0.0, 0.0);
    for i in 0..n {
        let p = vertices[i];
        let q = vertices[(i + 1) % n];
        let c = p.cross(q);
        cx += (p.x + q.x) * c;
        cy += (p.y + q.y) * c;
    }
    Point2::new(cx / (6.0 * area), cy / (6.0 * area))
}

/// Clip a ring to the half-plane `{p : (p - origin) . normal <= 0}`.
///
/// Sutherland-Hodgman against a single line; concave input is fine since
/// the clipper itself is convex.
pub fn clip_half_plane(ring: &[Point2], origin: Point2, normal: Point2) -> Vec<Point2> {
    let n = ring.len();
    let mut out = Vec::with_capacity(n + 2);
    if n == 0 {
        return out;
    }
    let side = |p: Point2| (p - origin).dot(normal);
    for i in 0..n {
        let cur = ring[i];
        let next = ring[(i + 1) % n];
        let (sc, sn) = (side(cur), side(next));
        if sc <= 0.0 {
            out.push(cur);
        }
        if (sc < 0.0 && sn > 0.0) || (sc > 0.0 && sn < 0.0) {
            let t = sc / (sc - sn);
            out.push(cur + (next - cur) * t);
        }
    }
    dedup_ring(&mut out);
    out
}

pub(crate) fn dedup_ring(ring: &mut Vec<Point2>) {
    ring.dedup_by(|a, b| a.dist_sq(*b) < 1e-24);
    while ring.len() > 1 && ring[0].dist_sq(ring[ring.len() - 1]) < 1e-24 {
        ring.pop();
    }
}

/// A simple polygon describing the printable region of one layer.
#[derive(Debug, Clone, PartialEq)]
pub struct PolygonDomain {
    vertices: Vec<Point2>,
    bbox: BoundingBox,
}

impl PolygonDomain {
    pub fn new(vertices: Vec<Point2>) -> Result<Self, GeometryError> {
        let mut vertices = vertices;
        dedup_ring(&mut vertices);
        if vertices.len() < 3 {
            return Err(GeometryError::TooFewVertices(vertices.len()));
        }
        if vertices.iter().any(|p| !p.is_finite()) {
            return Err(GeometryError::NonFinite);
        }
        let v0 = vertices[0];
        let span = vertices.iter().map(|p| p.dist(v0)).fold(0.0, f64::max);
        let collinear = vertices
            .windows(2)
            .all(|w| (w[0] - v0).cross(w[1] - v0).abs() <= 1e-12 * span * span);
        if collinear {
            return Err(GeometryError::ZeroArea);
        }
        let n = vertices.len();
        let edge = |i: usize| Segment::new(vertices[i], vertices[(i + 1) % n], true);
        for i in 0..n {
            for j in (i + 1)..n {
                let adjacent = j == i + 1 || (i == 0 && j == n - 1);
                let (ei, ej) = (edge(i), edge(j));
                if adjacent {
                    // Neighbouring edges may only share their joint; a
                    // fold-back overlap is still an intersection.
                    if segments_intersect(&ei, &ej) {
                        return Err(GeometryError::SelfIntersection(i, j));
                    }
                } else if segments_intersect(&ei, &ej) || touches(&ei, &ej) {
                    return Err(GeometryError::SelfIntersection(i, j));
                }
            }
        }
        if polygon_area(&vertices).abs() <= 1e-18 {
            return Err(GeometryError::ZeroArea);
        }
        let bbox = BoundingBox::of(&vertices).expect("non-empty");
        Ok(Self { vertices, bbox })
    }

    /// Axis-aligned rectangle `[x0, x1] x [y0, y1]`.
    pub fn rectangle(x0: f64, y0: f64, x1: f64, y1: f64) -> Result<Self, GeometryError> {
        Self::new(alloc::vec![
            Point2::new(x0, y0),
            Point2::new(x1, y0),
            Point2::new(x1, y1),
            Point2::new(x0, y1),
        ])
    }

    /// Regular polygon with `n` vertices inscribed in a circle.
    pub fn regular(n: usize, center: Point2, radius: f64, phase: f64) -> Result<Self, GeometryError> {
        let vertices = (0..n)
            .map(|k| {
                let t = phase + core::f64::consts::TAU * k as f64 / n as f64;
                Point2::new(center.x + radius * libm::cos(t), center.y + radius * libm::sin(t))
            })
            .collect();
        Self::new(vertices)
    }

    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    pub fn bbox(&self) -> BoundingBox {
        self.bbox
    }

    pub fn area(&self) -> f64 {
        polygon_area(&self.vertices).abs()
    }

    pub fn centroid(&self) -> Point2 {
        polygon_centroid(&self.vertices)
    }

    /// Largest vertex-to-vertex distance (the domain diameter).
    pub fn max_length(&self) -> f64 {
        let mut best: f64 = 0.0;
        for (i, a) in self.vertices.iter().enumerate() {
            for b in &self.vertices[i + 1..] {
                best = best.max(a.dist(*b));
            }
        }
        best
    }

    pub fn edges(&self) -> impl Iterator<Item = Segment> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| Segment::new(self.vertices[i], self.vertices[(i + 1) % n], true))
    }

    /// Boundary-inclusive point-in-polygon test.
    ///
    /// Points within `tol` of an edge are inside; otherwise a half-open
    /// crossing rule decides.
    pub fn contains(&self, p: Point2, tol: f64) -> bool {
        if self.edges().any(|e| point_segment_distance(p, e.a, e.b) <= tol) {
            return true;
        }
        let mut inside = false;
        let n = self.vertices.len();
        for i in 0..n {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            if (a.y > p.y) != (b.y > p.y) {
                let x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
                if p.x < x {
                    inside = !inside;
                }
            }
        }
        inside
    }

    /// True when the straight segment `a -> b` stays inside the domain.
    pub fn contains_segment(&self, a: Point2, b: Point2, tol: f64) -> bool {
        if !self.contains(a, tol) || !self.contains(b, tol) || !self.contains(a.midpoint(b), tol) {
            return false;
        }
        let s = Segment::new(a, b, true);
        // Crossing an edge strictly means leaving the domain; grazing a
        // vertex or running along the boundary is allowed.
        !self.edges().any(|e| {
            let o1 = (e.b - e.a).cross(a - e.a);
            let o2 = (e.b - e.a).cross(b - e.a);
            let o3 = (b - a).cross(e.a - a);
            let o4 = (b - a).cross(e.b - a);
            let eps = 1e-12;
            segments_intersect(&s, &e) && o1 * o2 < -eps && o3 * o4 < -eps
        })
    }

    /// Intersection with the axis-aligned rectangle `bb` (may be empty).
    pub fn clip_to_box(&self, bb: &BoundingBox) -> Vec<Point2> {
        let mut ring = self.vertices.clone();
        ring = clip_half_plane(&ring, bb.min, Point2::new(-1.0, 0.0));
        ring = clip_half_plane(&ring, bb.max, Point2::new(1.0, 0.0));
        ring = clip_half_plane(&ring, bb.min, Point2::new(0.0, -1.0));
        ring = clip_half_plane(&ring, bb.max, Point2::new(0.0, 1.0));
        ring
    }
}

fn touches(e1: &Segment, e2: &Segment) -> bool {
    // Non-adjacent polygon edges must not even share an endpoint.
    let eps = 1e-12;
    [e1.a, e1.b]
        .iter()
        .any(|&p| point_segment_distance(p, e2.a, e2.b) <= eps)
        || [e2.a, e2.b]
            .iter()
            .any(|&p| point_segment_distance(p, e1.a, e1.b) <= eps)
}

pub(crate) fn point_segment_distance(p: Point2, a: Point2, b: Point2) -> f64 {
    let d = b - a;
    let len2 = d.dot(d);
    if len2 == 0.0 {
        return p.dist(a);
    }
    let t = ((p - a).dot(d) / len2).clamp(0.0, 1.0);
    p.dist(a + d * t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn rejects_bad_polygons() {
        assert_eq!(
            PolygonDomain::new(vec![Point2::new(0.0, 0.0), Point2::new(1.0, 0.0)]),
            Err(GeometryError::TooFewVertices(2))
        );
        assert_eq!(
            PolygonDomain::new(vec![
                Point2::new(0.0, 0.0),
                Point2::new(1.0, 0.0),
                Point2::new(2.0, 0.0)
            ]),
            Err(GeometryError::ZeroArea)
        );
        // Bow tie.
        let bow = PolygonDomain::new(vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 1.0),
            Point2::new(1.0, 0.0),
            Point2::new(0.0, 1.0),
        ]);
        assert!(matches!(bow, Err(GeometryError::SelfIntersection(_, _))));
    }

    #[test]
    fn contains_is_boundary_inclusive() {
        let sq = PolygonDomain::rectangle(0.0, 0.0, 1.0, 1.0).unwrap();
        assert!(sq.contains(Point2::new(0.5, 0.5), 1e-9));
        assert!(sq.contains(Point2::new(0.0, 0.0), 1e-9));
        assert!(sq.contains(Point2::new(1.0, 0.3), 1e-9));
        assert!(!sq.contains(Point2::new(1.0 + 1e-6, 0.3), 1e-9));
        assert!(!sq.contains(Point2::new(-0.1, 0.5), 1e-9));
    }

    #[test]
    fn area_and_centroid() {
        let sq = PolygonDomain::rectangle(1.0, 2.0, 3.0, 6.0).unwrap();
        assert!((sq.area() - 8.0).abs() < 1e-12);
        let c = sq.centroid();
        assert!((c.x - 2.0).abs() < 1e-12 && (c.y - 4.0).abs() < 1e-12);
        assert!((sq.max_length() - libm::hypot(2.0, 4.0)).abs() < 1e-12);
    }

    #[test]
    fn clip_square_to_box() {
        let sq = PolygonDomain::rectangle(0.0, 0.0, 7.0, 5.0).unwrap();
        let bb = BoundingBox { min: Point2::new(5.0, 0.0), max: Point2::new(10.0, 5.0) };
        let ring = sq.clip_to_box(&bb);
        assert!((polygon_area(&ring).abs() - 10.0).abs() < 1e-12);
    }

    #[test]
    fn segment_containment_in_concave_domain() {
        // U shape opening upwards.
        let u = PolygonDomain::new(vec![
            Point2::new(0.0, 0.0),
            Point2::new(3.0, 0.0),
            Point2::new(3.0, 3.0),
            Point2::new(2.0, 3.0),
            Point2::new(2.0, 1.0),
            Point2::new(1.0, 1.0),
            Point2::new(1.0, 3.0),
            Point2::new(0.0, 3.0),
        ])
        .unwrap();
        assert!(u.contains_segment(Point2::new(0.5, 0.5), Point2::new(2.5, 0.5), 1e-9));
        assert!(!u.contains_segment(Point2::new(0.5, 2.0), Point2::new(2.5, 2.0), 1e-9));
        // Along the boundary is fine.
        assert!(u.contains_segment(Point2::new(0.0, 0.0), Point2::new(3.0, 0.0), 1e-9));
    }
}
