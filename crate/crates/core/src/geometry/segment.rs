use super::Point2;

/// A straight move between two points with the laser on or off.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub a: Point2,
    pub b: Point2,
    pub laser: bool,
}

impl Segment {
    pub fn new(a: Point2, b: Point2, laser: bool) -> Self {
        Self { a, b, laser }
    }

    pub fn length(&self) -> f64 {
        self.a.dist(self.b)
    }
}

// Orientation sign of `c` relative to the directed line `a -> b`, with a
// tolerance scaled by the segment lengths involved.
fn orient(a: Point2, b: Point2, c: Point2, eps: f64) -> i8 {
    let v = (b - a).cross(c - a);
    if v > eps {
        1
    } else if v < -eps {
        -1
    } else {
        0
    }
}

fn on_segment(p: Point2, a: Point2, b: Point2, eps_len: f64) -> bool {
    p.x >= a.x.min(b.x) - eps_len
        && p.x <= a.x.max(b.x) + eps_len
        && p.y >= a.y.min(b.y) - eps_len
        && p.y <= a.y.max(b.y) + eps_len
}

fn same_point(p: Point2, q: Point2, eps_len: f64) -> bool {
    (p.x - q.x).abs() <= eps_len && (p.y - q.y).abs() <= eps_len
}

/// True iff the segments meet at a point interior to at least one of them.
///
/// Touching only at a shared endpoint does not count; an endpoint resting
/// on the interior of the other segment does, as does a collinear overlap
/// of positive length.
pub fn segments_intersect(s1: &Segment, s2: &Segment) -> bool {
    let scale = s1
        .length()
        .max(s2.length())
        .max(s1.a.x.abs().max(s1.a.y.abs()))
        .max(1e-300);
    let eps_len = 1e-12 * scale;
    let eps = 1e-12 * scale * scale;

    let o1 = orient(s1.a, s1.b, s2.a, eps);
    let o2 = orient(s1.a, s1.b, s2.b, eps);
    let o3 = orient(s2.a, s2.b, s1.a, eps);
    let o4 = orient(s2.a, s2.b, s1.b, eps);

    if o1 * o2 < 0 && o3 * o4 < 0 {
        return true;
    }

    if o1 == 0 && o2 == 0 && o3 == 0 && o4 == 0 {
        // Collinear: compare projections on the dominant axis.
        let d = s1.b - s1.a;
        let key = |p: Point2| if d.x.abs() >= d.y.abs() { p.x } else { p.y };
        let (l1, h1) = minmax(key(s1.a), key(s1.b));
        let (l2, h2) = minmax(key(s2.a), key(s2.b));
        let overlap = h1.min(h2) - l1.max(l2);
        return overlap > eps_len;
    }

    // Touching configurations: an endpoint of one segment lies on the other.
    let endpoints1 = [s1.a, s1.b];
    let endpoints2 = [s2.a, s2.b];
    let touches = |p: Point2, o: i8, seg: &Segment| o == 0 && on_segment(p, seg.a, seg.b, eps_len);
    let contacts = [
        (s2.a, touches(s2.a, o1, s1)),
        (s2.b, touches(s2.b, o2, s1)),
        (s1.a, touches(s1.a, o3, s2)),
        (s1.b, touches(s1.b, o4, s2)),
    ];
    contacts.iter().any(|&(p, hit)| {
        hit && !(endpoints1.iter().any(|&e| same_point(e, p, eps_len))
            && endpoints2.iter().any(|&e| same_point(e, p, eps_len)))
    })
}

fn minmax(a: f64, b: f64) -> (f64, f64) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn seg(ax: f64, ay: f64, bx: f64, by: f64) -> Segment {
        Segment::new(Point2::new(ax, ay), Point2::new(bx, by), true)
    }

    #[test]
    fn crossing_diagonals() {
        assert!(segments_intersect(&seg(0.0, 0.0, 1.0, 1.0), &seg(0.0, 1.0, 1.0, 0.0)));
    }

    #[test]
    fn shared_endpoint_does_not_count() {
        assert!(!segments_intersect(&seg(0.0, 0.0, 1.0, 0.0), &seg(1.0, 0.0, 1.0, 1.0)));
        // Consecutive collinear moves share only the joint.
        assert!(!segments_intersect(&seg(0.0, 0.0, 1.0, 0.0), &seg(1.0, 0.0, 2.0, 0.0)));
    }

    #[test]
    fn parallel_offset_segments() {
        assert!(!segments_intersect(&seg(0.0, 0.0, 1.0, 0.0), &seg(0.0, 0.5, 1.0, 0.5)));
    }

    #[test]
    fn t_junction_counts() {
        assert!(segments_intersect(&seg(0.0, 0.0, 2.0, 0.0), &seg(1.0, 0.0, 1.0, 1.0)));
    }

    #[test]
    fn collinear_overlap_counts() {
        assert!(segments_intersect(&seg(0.0, 0.0, 2.0, 0.0), &seg(1.0, 0.0, 3.0, 0.0)));
        assert!(!segments_intersect(&seg(0.0, 0.0, 1.0, 0.0), &seg(2.0, 0.0, 3.0, 0.0)));
    }

    #[test]
    fn lattice_diagonals_at_hatch_scale() {
        let h = 0.05;
        assert!(segments_intersect(
            &seg(3.0 * h, 7.0 * h, 4.0 * h, 8.0 * h),
            &seg(4.0 * h, 7.0 * h, 3.0 * h, 8.0 * h)
        ));
        assert!(!segments_intersect(
            &seg(3.0 * h, 7.0 * h, 4.0 * h, 8.0 * h),
            &seg(4.0 * h, 8.0 * h, 5.0 * h, 8.0 * h)
        ));
    }

    // Independent oracle: solve a + t(b-a) = c + u(d-c) by Cramer's rule.
    fn parametric_cross(s1: &Segment, s2: &Segment) -> bool {
        let r = s1.b - s1.a;
        let s = s2.b - s2.a;
        let denom = r.x * s.y - r.y * s.x;
        if denom == 0.0 {
            return false;
        }
        let qp = s2.a - s1.a;
        let t = (qp.x * s.y - qp.y * s.x) / denom;
        let u = (qp.x * r.y - qp.y * r.x) / denom;
        t > 0.0 && t < 1.0 && u > 0.0 && u < 1.0
    }

    #[test]
    fn agrees_with_parametric_solver() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut crossings = 0;
        for _ in 0..10_000 {
            let mut p = || Point2::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            let s1 = Segment::new(p(), p(), true);
            let s2 = Segment::new(p(), p(), true);
            let expected = parametric_cross(&s1, &s2);
            crossings += expected as usize;
            assert_eq!(segments_intersect(&s1, &s2), expected, "{s1:?} {s2:?}");
        }
        assert!(crossings > 1000);
    }
}
