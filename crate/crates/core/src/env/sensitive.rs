use alloc::vec::Vec;

use crate::geometry::{turning_angle, Point2};
use crate::toolpath::Toolpath;

/// Two sharp turns close together along the path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensitiveRegion {
    /// Move index of the earlier turn.
    pub first: usize,
    /// Move index of the later turn.
    pub second: usize,
    pub at: Point2,
    /// Laser-on path length between the two turns, mm.
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SensitiveReport {
    pub regions: Vec<SensitiveRegion>,
}

impl SensitiveReport {
    pub fn count(&self) -> usize {
        self.regions.len()
    }
}

/// Find pairs of consecutive sharp (< 90 degree) laser-on turns at most
/// `coeff * path.hatch` apart along the path.
///
/// A turn is only measured where the beam arrives and leaves with the
/// laser on; a laser-off move breaks the chain of turns.
pub fn detect_sensitive_regions(path: &Toolpath, coeff: f64) -> SensitiveReport {
    let gate = coeff * path.hatch * (1.0 + 1e-9);
    let moves = &path.moves;
    let mut report = SensitiveReport::default();
    let mut arc = 0.0;
    let mut last: Option<(usize, f64)> = None;
    for k in 1..moves.len() {
        let incoming = moves[k].pos - moves[k - 1].pos;
        if !moves[k].laser_on() {
            last = None;
            continue;
        }
        arc += incoming.norm();
        let Some(next) = moves.get(k + 1) else { break };
        if !next.laser_on() {
            continue;
        }
        let Ok(alpha) = turning_angle(incoming, next.pos - moves[k].pos) else {
            continue;
        };
        if alpha < 90.0 {
            if let Some((first, at)) = last {
                let distance = arc - at;
                if distance <= gate {
                    report.regions.push(SensitiveRegion { first, second: k, at: moves[k].pos, distance });
                }
            }
            last = Some((k, arc));
        }
    }
    report
}

/// True iff the point reached by move `k` has no laser-on move on either
/// side, i.e. it would only ever be melted as a lone spot.
pub fn is_isolated(path: &Toolpath, k: usize) -> bool {
    let incoming = path.moves[k].laser_on();
    let outgoing = path.moves.get(k + 1).is_some_and(|m| m.laser_on());
    !incoming && !outgoing
}
