//! Reference scan patterns: zigzag, chessboard and a greedy adaptive
//! generator driven by the temperature proxy.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::env::{EnvConfig, EnvError, ScanEnv};
use crate::geometry::{island_of, Point2, SampleGrid};
use crate::math;
use crate::toolpath::{MoveKind, Toolpath};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Axis {
    #[default]
    X,
    Y,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BaselineSpec {
    Zigzag { direction: Axis },
    Chessboard { island_size: f64 },
    Atg { threshold_deg: f64 },
}

impl BaselineSpec {
    pub fn name(&self) -> &'static str {
        match self {
            BaselineSpec::Zigzag { .. } => "zigzag",
            BaselineSpec::Chessboard { .. } => "chessboard",
            BaselineSpec::Atg { .. } => "atg",
        }
    }

    pub fn generate(&self, grid: &SampleGrid, env: &EnvConfig) -> Result<Toolpath, EnvError> {
        match *self {
            BaselineSpec::Zigzag { direction } => Ok(zigzag(grid, direction)),
            BaselineSpec::Chessboard { island_size } => Ok(chessboard(grid, island_size)),
            BaselineSpec::Atg { threshold_deg } => atg_greedy(grid, env, threshold_deg),
        }
    }
}

/// Whether a move between consecutive scan lines may keep the laser on.
fn connector_laser_on(grid: &SampleGrid, a: Point2, b: Point2) -> bool {
    match grid.domain() {
        Some(d) => d.contains_segment(a, b, 1e-9 * grid.hatch()),
        None => a.dist(b) <= core::f64::consts::SQRT_2 * grid.hatch() * (1.0 + 1e-9),
    }
}

/// Serpentine over the lines of `indices` parallel to `axis`, starting at
/// the lowest line from its low end. Gaps within a line are jumped with
/// the laser off.
fn serpentine(grid: &SampleGrid, indices: &[usize], axis: Axis, path: &mut Toolpath) {
    // line coordinate -> (position along the line, point)
    let mut lines: BTreeMap<i64, Vec<(i64, usize)>> = BTreeMap::new();
    for &k in indices {
        let (i, j) = grid.coords(k);
        let (along, line) = match axis {
            Axis::X => (i, j),
            Axis::Y => (j, i),
        };
        lines.entry(line).or_default().push((along, k));
    }
    for (n, run) in lines.values_mut().enumerate() {
        run.sort_unstable();
        if n % 2 == 1 {
            run.reverse();
        }
        let mut prev_along: Option<i64> = None;
        for (m, &(along, k)) in run.iter().enumerate() {
            let pos = grid.point(k);
            let kind = match (path.moves.last(), prev_along) {
                (None, _) => MoveKind::Start,
                (Some(_), Some(pa)) if (along - pa).abs() == 1 => MoveKind::Laser,
                (Some(_), Some(_)) => MoveKind::Transition,
                (Some(last), None) => {
                    debug_assert_eq!(m, 0);
                    if connector_laser_on(grid, last.pos, pos) {
                        MoveKind::Laser
                    } else {
                        MoveKind::Transition
                    }
                }
            };
            path.push(k, pos, kind);
            prev_along = Some(along);
        }
    }
}

/// Boustrophedon scan of the grid along `direction`.
pub fn zigzag(grid: &SampleGrid, direction: Axis) -> Toolpath {
    let all: Vec<usize> = (0..grid.len()).collect();
    let mut path = Toolpath::new(grid.hatch());
    serpentine(grid, &all, direction, &mut path);
    path
}

/// Square islands of edge `island_size` anchored at the grid's bounding-box
/// minimum. Islands with even `row + col` are filled along X, odd ones
/// along Y; islands are taken row by row, alternating direction, and
/// joined by laser-off transitions.
pub fn chessboard(grid: &SampleGrid, island_size: f64) -> Toolpath {
    let bb = grid.bbox();
    let count = |extent: f64| (math::ceil(extent / island_size - 1e-9) as usize).max(1);
    let (cols, rows) = (count(bb.width()), count(bb.height()));
    let mut members: Vec<Vec<usize>> = alloc::vec![Vec::new(); cols * rows];
    for (k, &p) in grid.points().iter().enumerate() {
        let (c, r) = island_of(bb.min, island_size, cols, rows, p);
        members[r * cols + c].push(k);
    }
    let mut path = Toolpath::new(grid.hatch());
    for r in 0..rows {
        for n in 0..cols {
            let c = if r % 2 == 0 { n } else { cols - 1 - n };
            let island = &members[r * cols + c];
            if island.is_empty() {
                continue;
            }
            let axis = if (r + c) % 2 == 0 { Axis::X } else { Axis::Y };
            let mut fill = Toolpath::new(grid.hatch());
            serpentine(grid, island, axis, &mut fill);
            if path.is_empty() {
                path = fill;
            } else {
                path.append_with_transition(&fill);
            }
        }
    }
    path
}

/// Greedy adaptive pattern: from each point move to the coolest legal
/// neighbour (temperature proxy) among those turning by at least
/// `threshold_deg`, or the coolest of all when none is smooth enough.
/// Dead ends, crossings and collision counting follow [`ScanEnv`].
pub fn atg_greedy(grid: &SampleGrid, cfg: &EnvConfig, threshold_deg: f64) -> Result<Toolpath, EnvError> {
    let mut g = grid.clone();
    g.reset_collisions();
    let mut env = ScanEnv::new(g, *cfg)?;
    while !env.is_done() {
        let target = {
            let cands = env.candidates();
            let coolest = |smooth_only: bool| {
                cands
                    .iter()
                    .filter(|c| !smooth_only || c.alpha >= threshold_deg)
                    .fold(None, |best: Option<(f64, usize)>, c| match best {
                        Some((f, _)) if f <= c.proxy => best,
                        _ => Some((c.proxy, c.target)),
                    })
                    .map(|(_, t)| t)
            };
            coolest(true).or_else(|| coolest(false))
        };
        match target {
            Some(t) => env.step_to(t)?,
            None => env.step(0)?,
        };
    }
    Ok(env.path().clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::detect_sensitive_regions;
    use crate::geometry::{sample_uniform, segments_intersect, PolygonDomain};
    use proptest::prelude::*;

    const H: f64 = 0.05;

    fn square(n: usize) -> SampleGrid {
        let side = (n - 1) as f64 * H;
        sample_uniform(&PolygonDomain::rectangle(0.0, 0.0, side, side).unwrap(), H).unwrap()
    }

    fn covers_once(path: &Toolpath, n: usize) -> bool {
        path.len() == n && path.visit_counts(n).iter().all(|&c| c == 1)
    }

    fn no_laser_crossings(path: &Toolpath) -> bool {
        let segs: Vec<_> = path.laser_segments().collect();
        (0..segs.len()).all(|a| (a + 1..segs.len()).all(|b| !segments_intersect(&segs[a], &segs[b])))
    }

    #[test]
    fn zigzag_three_by_three() {
        let g = square(3);
        let p = zigzag(&g, Axis::X);
        let coords: Vec<_> = p.moves.iter().map(|m| g.coords(m.index)).collect();
        assert_eq!(coords, [(0, 0), (1, 0), (2, 0), (2, 1), (1, 1), (0, 1), (0, 2), (1, 2), (2, 2)]);
        assert_eq!(p.segments().count(), 8);
        assert_eq!(p.void_moves(), 0);
        assert_eq!(detect_sensitive_regions(&p, 3.0).count(), 0);
        let q = zigzag(&g, Axis::Y);
        assert_eq!(g.coords(q.moves[1].index), (0, 1));
    }

    #[test]
    fn zigzag_splits_gapped_rows() {
        // U shape: the top row has a notch.
        let dom = PolygonDomain::new(alloc::vec![
            Point2::new(0.0, 0.0),
            Point2::new(0.5, 0.0),
            Point2::new(0.5, 0.5),
            Point2::new(0.35, 0.5),
            Point2::new(0.35, 0.2),
            Point2::new(0.15, 0.2),
            Point2::new(0.15, 0.5),
            Point2::new(0.0, 0.5),
        ])
        .unwrap();
        let g = sample_uniform(&dom, H).unwrap();
        let p = zigzag(&g, Axis::X);
        assert!(covers_once(&p, g.len()));
        assert!(p.void_moves() > 0);
        assert!(no_laser_crossings(&p));
        for s in p.laser_segments() {
            assert!(dom.contains_segment(s.a, s.b, 1e-9));
        }
    }

    #[test]
    fn chessboard_parity_and_coverage() {
        // 2 x 2 islands of 0.25 mm on a 0.45 mm square.
        let g = square(10);
        let p = chessboard(&g, 0.25);
        assert!(covers_once(&p, g.len()));
        assert_eq!(p.moves.iter().filter(|m| m.kind == MoveKind::Transition).count(), 3);
        // First island (0,0) fills along X, the next one (1,0) along Y.
        assert_eq!(g.coords(p.moves[1].index), (1, 0));
        let second = p.moves.iter().position(|m| m.kind == MoveKind::Transition).unwrap();
        let (a, b) = (g.coords(p.moves[second].index), g.coords(p.moves[second + 1].index));
        assert_eq!(a.0, b.0);
        // Laser-on moves stay inside one island.
        let bb = g.bbox();
        for s in p.laser_segments() {
            assert_eq!(island_of(bb.min, 0.25, 2, 2, s.a), island_of(bb.min, 0.25, 2, 2, s.b));
        }
        assert!(no_laser_crossings(&p));
    }

    #[test]
    fn chessboard_thirty_mm_has_36_islands() {
        let g = sample_uniform(&PolygonDomain::rectangle(0.0, 0.0, 30.0, 30.0).unwrap(), 0.5).unwrap();
        let p = chessboard(&g, 5.0);
        assert_eq!(p.moves.iter().filter(|m| m.kind == MoveKind::Transition).count(), 35);
        assert!(covers_once(&p, g.len()));
    }

    #[test]
    fn atg_row_matches_zigzag() {
        let row = (0..8).map(|i| (i, 0)).collect();
        let g = SampleGrid::from_lattice(H, Point2::new(0.0, 0.0), row, None).unwrap();
        let a = atg_greedy(&g, &EnvConfig::default(), 90.0).unwrap();
        assert_eq!(a, zigzag(&g, Axis::X));
    }

    #[test]
    fn atg_square_has_no_sensitive_regions() {
        let g = square(20);
        let p = atg_greedy(&g, &EnvConfig::default(), 90.0).unwrap();
        assert!(covers_once(&p, g.len()));
        assert!(no_laser_crossings(&p));
        assert_eq!(detect_sensitive_regions(&p, 3.0).count(), 0);
        // First move from the corner: every neighbour is cold, lowest index wins.
        assert_eq!(p.moves[1].index, 1);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn baselines_cover_once_without_crossings(
            sides in 3usize..8,
            radius in 0.2f64..0.5,
            phase in 0.0f64..1.0,
            island in 0.1f64..0.4,
        ) {
            let dom = PolygonDomain::regular(sides, Point2::new(0.0, 0.0), radius, phase).unwrap();
            let Ok(g) = sample_uniform(&dom, H) else { return Ok(()) };
            for p in [
                zigzag(&g, Axis::X),
                zigzag(&g, Axis::Y),
                chessboard(&g, island),
                atg_greedy(&g, &EnvConfig::default(), 90.0).unwrap(),
            ] {
                prop_assert!(covers_once(&p, g.len()));
                prop_assert!(no_laser_crossings(&p));
            }
            prop_assert_eq!(zigzag(&g, Axis::X).void_moves(), 0);
        }
    }
}
