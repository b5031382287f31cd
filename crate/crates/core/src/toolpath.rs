//! Ordered scan moves over a sampled domain.

use alloc::vec::Vec;

use crate::geometry::{Point2, Segment};

/// How the beam arrived at a point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MoveKind {
    /// First point of a path; the beam is positioned with the laser off.
    Start,
    /// Laser-on move from the previous point.
    Laser,
    /// Laser-off move chosen to avoid remelting a crossed track.
    CollisionVoid,
    /// Laser-off jump to the nearest unvisited point.
    FallbackVoid,
    /// Laser-off transition between separately generated sub-paths.
    Transition,
}

impl MoveKind {
    pub fn laser_on(self) -> bool {
        matches!(self, MoveKind::Laser)
    }

    pub fn is_void(self) -> bool {
        matches!(self, MoveKind::CollisionVoid | MoveKind::FallbackVoid | MoveKind::Transition)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Move {
    /// Index of the sample point this move arrives at.
    pub index: usize,
    pub pos: Point2,
    pub kind: MoveKind,
}

impl Move {
    pub fn laser_on(&self) -> bool {
        self.kind.laser_on()
    }
}

/// A scan path: the beam visits `moves[0]`, then each following move in
/// turn with the laser on or off.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Toolpath {
    /// Hatch spacing in millimetres.
    pub hatch: f64,
    pub moves: Vec<Move>,
}

impl Toolpath {
    pub fn new(hatch: f64) -> Self {
        Self { hatch, moves: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.moves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.moves.is_empty()
    }

    pub fn push(&mut self, index: usize, pos: Point2, kind: MoveKind) {
        let kind = if self.moves.is_empty() { MoveKind::Start } else { kind };
        self.moves.push(Move { index, pos, kind });
    }

    /// Segments between consecutive moves, laser flag taken from the
    /// arriving move.
    pub fn segments(&self) -> impl Iterator<Item = Segment> + '_ {
        self.moves
            .windows(2)
            .map(|w| Segment::new(w[0].pos, w[1].pos, w[1].laser_on()))
    }

    pub fn laser_segments(&self) -> impl Iterator<Item = Segment> + '_ {
        self.segments().filter(|s| s.laser)
    }

    pub fn length(&self) -> f64 {
        self.segments().map(|s| s.length()).sum()
    }

    pub fn laser_length(&self) -> f64 {
        self.laser_segments().map(|s| s.length()).sum()
    }

    pub fn void_moves(&self) -> usize {
        self.moves.iter().filter(|m| m.kind.is_void()).count()
    }

    /// Append `other`, joining the two with a laser-off transition.
    pub fn append_with_transition(&mut self, other: &Toolpath) {
        for (k, m) in other.moves.iter().enumerate() {
            let kind = if k == 0 { MoveKind::Transition } else { m.kind };
            self.push(m.index, m.pos, kind);
        }
    }

    /// Map point indices through `f` (e.g. local cell index to global).
    pub fn remap_indices(&mut self, f: impl Fn(usize) -> usize) {
        for m in &mut self.moves {
            m.index = f(m.index);
        }
    }

    /// Number of times each of `n` points is visited.
    pub fn visit_counts(&self, n: usize) -> Vec<usize> {
        let mut counts = alloc::vec![0; n];
        for m in &self.moves {
            if m.index < n {
                counts[m.index] += 1;
            }
        }
        counts
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_move_is_start_and_segments_follow_arrivals() {
        let mut p = Toolpath::new(0.05);
        p.push(0, Point2::new(0.0, 0.0), MoveKind::Laser);
        p.push(1, Point2::new(0.05, 0.0), MoveKind::Laser);
        p.push(5, Point2::new(0.5, 0.0), MoveKind::FallbackVoid);
        assert_eq!(p.moves[0].kind, MoveKind::Start);
        let segs: Vec<_> = p.segments().collect();
        assert_eq!(segs.len(), 2);
        assert!(segs[0].laser && !segs[1].laser);
        assert!((p.laser_length() - 0.05).abs() < 1e-15);
        assert_eq!(p.void_moves(), 1);
    }

    #[test]
    fn append_inserts_transition() {
        let mut a = Toolpath::new(0.05);
        a.push(0, Point2::new(0.0, 0.0), MoveKind::Start);
        let mut b = Toolpath::new(0.05);
        b.push(1, Point2::new(1.0, 0.0), MoveKind::Start);
        b.push(2, Point2::new(1.05, 0.0), MoveKind::Laser);
        a.append_with_transition(&b);
        let kinds: Vec<_> = a.moves.iter().map(|m| m.kind).collect();
        assert_eq!(kinds, [MoveKind::Start, MoveKind::Transition, MoveKind::Laser]);
    }
}
