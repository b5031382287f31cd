use alloc::vec::Vec;

use super::collide::SegmentIndex;
use super::proxy::TemperatureProxy;
use super::reward::{collision_penalty, isolated_penalty, reward_main, RewardBreakdown};
use super::{EnvConfig, EnvError, Observation, N_ACTIONS, OBS_DIM};
use crate::geometry::{knn_into, turning_angle, BoundingBox, Point2, SampleGrid, Segment};
use crate::toolpath::{MoveKind, Toolpath};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    /// Coolest neighbour under the temperature proxy.
    MinTemp,
    /// Largest turning angle.
    Smoothest,
    /// Second largest turning angle.
    SecondSmoothest,
}

impl Strategy {
    pub const ALL: [Strategy; N_ACTIONS] = [Strategy::MinTemp, Strategy::Smoothest, Strategy::SecondSmoothest];
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CandidateAction {
    pub strategy: Strategy,
    pub target: usize,
    /// Turning angle at the current point, degrees.
    pub alpha: f64,
    /// Proxy value at the target.
    pub proxy: f64,
    /// The move would cross melted track.
    pub collision: bool,
    /// Taking the move would fire the sharp-turn penalty.
    pub sensitive: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgentState {
    pub current: usize,
    /// Unit direction of the last move; `None` at the start point.
    pub prev_dir: Option<Point2>,
    /// Whether the beam reached `current` with the laser on.
    pub arrived_laser: bool,
    pub steps: usize,
    /// Elapsed scan time, s.
    pub time: f64,
    /// Laser-on path length so far, mm.
    pub arc: f64,
    /// Laser-on path position of the previous sharp turn in the current
    /// unbroken chain of laser-on moves.
    pub last_sharp: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub target: usize,
    pub kind: MoveKind,
    pub reward: RewardBreakdown,
    pub done: bool,
}

/// Totals of one episode.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EpisodeSummary {
    pub total_reward: f64,
    /// Steps where the sharp-turn term fired.
    pub sensitive: usize,
    /// Steps resolved as collision void moves.
    pub collisions: usize,
    /// Points left without any laser-on move.
    pub isolated: usize,
    pub steps: usize,
}

/// Preferred start: the point closest (in L1) to the lower-left corner of
/// the grid's bounding box, lowest index on ties.
pub fn start_point(grid: &SampleGrid) -> Option<usize> {
    let bb = grid.bbox();
    let mut best: Option<(f64, usize)> = None;
    for (k, p) in grid.points().iter().enumerate() {
        let score = (p.x - bb.min.x) + (p.y - bb.min.y);
        if best.is_none_or(|(s, _)| score < s - 1e-12 * grid.hatch()) {
            best = Some((score, k));
        }
    }
    best.map(|b| b.1)
}

fn is_backwards(prev_dir: Option<Point2>, step: Point2) -> bool {
    match (prev_dir, step.normalized()) {
        (Some(d), Some(s)) => d.dot(s) < -1.0 + 1e-9,
        _ => false,
    }
}

/// Unvisited neighbours of `current` within `radius` (mm), without the one
/// straight behind `prev_dir`, in ascending index order.
pub fn legal_moves(grid: &SampleGrid, current: usize, prev_dir: Option<Point2>, radius: f64) -> Vec<usize> {
    let mut out = Vec::with_capacity(8);
    legal_into(grid, current, prev_dir, radius, &mut out);
    out
}

fn legal_into(grid: &SampleGrid, current: usize, prev_dir: Option<Point2>, radius: f64, out: &mut Vec<usize>) {
    knn_into(grid, current, radius, out);
    let c = grid.point(current);
    out.retain(|&k| !grid.visited[k] && !is_backwards(prev_dir, grid.point(k) - c));
}

/// Nearest unvisited point at distance in `[h, max_len]`, lowest index on
/// ties; falls back to the nearest unvisited point at any distance.
pub fn nearest_fallback(grid: &SampleGrid, current: usize, max_len: f64) -> Option<usize> {
    let c = grid.point(current);
    let h = grid.hatch();
    let tol = 1e-9 * h;
    let mut gated: Option<(f64, usize)> = None;
    let mut any: Option<(f64, usize)> = None;
    for k in 0..grid.len() {
        if grid.visited[k] || k == current {
            continue;
        }
        let d = grid.point(k).dist(c);
        if any.is_none_or(|(b, _)| d < b - tol) {
            any = Some((d, k));
        }
        if d >= h - tol && d <= max_len + tol && gated.is_none_or(|(b, _)| d < b - tol) {
            gated = Some((d, k));
        }
    }
    gated.or(any).map(|b| b.1)
}

/// MinTemp, Smoothest and SecondSmoothest picks among `cands` (ascending
/// target order); `None` when there are no candidates.
fn select_actions(cands: &[CandidateAction]) -> Option<[CandidateAction; N_ACTIONS]> {
    if cands.is_empty() {
        return None;
    }
    // Keys are quantised so round-off never outranks the lowest-index rule;
    // stable ordering then keeps the lowest index first among equals.
    let key = |v: f64, scale: f64| libm::round(v * scale) as i64;
    let coolest = *cands.iter().min_by_key(|c| key(c.proxy, 1e12)).expect("non-empty");
    let mut by_angle: Vec<&CandidateAction> = cands.iter().collect();
    by_angle.sort_by_key(|c| -key(c.alpha, 1e6));
    let smoothest = *by_angle[0];
    let second = **by_angle.get(1).unwrap_or(&by_angle[0]);
    Some([
        CandidateAction { strategy: Strategy::MinTemp, ..coolest },
        CandidateAction { strategy: Strategy::Smoothest, ..smoothest },
        CandidateAction { strategy: Strategy::SecondSmoothest, ..second },
    ])
}

/// Episode state of one agent on one grid.
///
/// Visit flags are reset between episodes; per-point collision counters
/// are kept until [`ScanEnv::reset_collisions`].
#[derive(Debug, Clone)]
pub struct ScanEnv {
    grid: SampleGrid,
    cfg: EnvConfig,
    state: AgentState,
    proxy: TemperatureProxy,
    melted: SegmentIndex,
    path: Toolpath,
    remaining: usize,
    start: usize,
    radius: f64,
    max_len: f64,
    legal: Vec<usize>,
    candidates: Option<Vec<CandidateAction>>,
    actions: Option<[CandidateAction; N_ACTIONS]>,
    summary: EpisodeSummary,
}

impl ScanEnv {
    pub fn new(grid: SampleGrid, cfg: EnvConfig) -> Result<Self, EnvError> {
        let start = start_point(&grid).ok_or(EnvError::EmptyGrid)?;
        let h = grid.hatch();
        let bb = grid.bbox();
        let bounds = BoundingBox {
            min: Point2::new(bb.min.x - h, bb.min.y - h),
            max: Point2::new(bb.max.x + h, bb.max.y + h),
        };
        let mut env = Self {
            proxy: TemperatureProxy::new(cfg.proxy_len, cfg.proxy_sigma * h, cfg.proxy_tau * h / cfg.velocity),
            melted: SegmentIndex::new(bounds, h),
            path: Toolpath::new(h),
            remaining: grid.len(),
            start,
            radius: cfg.knn_radius * h,
            max_len: grid.max_length(),
            legal: Vec::with_capacity(8),
            candidates: None,
            actions: None,
            summary: EpisodeSummary::default(),
            state: AgentState {
                current: start,
                prev_dir: None,
                arrived_laser: false,
                steps: 0,
                time: 0.0,
                arc: 0.0,
                last_sharp: None,
            },
            grid,
            cfg,
        };
        env.reset();
        Ok(env)
    }

    pub fn grid(&self) -> &SampleGrid {
        &self.grid
    }

    pub fn into_grid(self) -> SampleGrid {
        self.grid
    }

    pub fn config(&self) -> &EnvConfig {
        &self.cfg
    }

    pub fn state(&self) -> &AgentState {
        &self.state
    }

    pub fn path(&self) -> &Toolpath {
        &self.path
    }

    pub fn summary(&self) -> &EpisodeSummary {
        &self.summary
    }

    pub fn is_done(&self) -> bool {
        self.remaining == 0
    }

    pub fn hatch(&self) -> f64 {
        self.grid.hatch()
    }

    /// Start a new episode at the default start point.
    pub fn reset(&mut self) {
        self.reset_at(self.start).expect("default start is a grid point");
    }

    pub fn reset_at(&mut self, start: usize) -> Result<(), EnvError> {
        if start >= self.grid.len() {
            return Err(EnvError::InvalidStart(start));
        }
        self.grid.reset_visits();
        self.grid.visited[start] = true;
        self.remaining = self.grid.len() - 1;
        self.proxy.clear();
        self.melted.clear();
        self.path = Toolpath::new(self.grid.hatch());
        self.path.push(start, self.grid.point(start), MoveKind::Start);
        self.state = AgentState {
            current: start,
            prev_dir: None,
            arrived_laser: false,
            steps: 0,
            time: 0.0,
            arc: 0.0,
            last_sharp: None,
        };
        self.summary = EpisodeSummary::default();
        self.candidates = None;
        self.actions = None;
        Ok(())
    }

    pub fn reset_collisions(&mut self) {
        self.grid.reset_collisions();
    }

    /// Whether leaving the current point towards `target` with the laser on
    /// fires the sharp-turn term, and the turning angle.
    fn turn(&self, target: usize) -> (f64, bool) {
        let s = &self.state;
        let step = self.grid.point(target) - self.grid.point(s.current);
        let alpha = match s.prev_dir {
            Some(d) => turning_angle(d, step).unwrap_or(180.0),
            None => 180.0,
        };
        let fires = s.arrived_laser
            && alpha < 90.0
            && s.last_sharp.is_some_and(|at| reward_main(alpha, s.arc - at, self.grid.hatch()) < 0.0);
        (alpha, fires)
    }

    /// Every legal move from the current point, in ascending target order.
    pub fn candidates(&mut self) -> &[CandidateAction] {
        if self.candidates.is_none() {
            let c = if self.is_done() { Vec::new() } else { self.build_candidates() };
            self.candidates = Some(c);
        }
        self.candidates.as_deref().unwrap_or(&[])
    }

    /// The three candidate moves from the current point, or `None` at a
    /// dead end.
    pub fn actions(&mut self) -> Option<[CandidateAction; N_ACTIONS]> {
        if self.actions.is_none() {
            self.actions = select_actions(self.candidates());
        }
        self.actions
    }

    fn build_candidates(&mut self) -> Vec<CandidateAction> {
        let mut legal = core::mem::take(&mut self.legal);
        legal_into(&self.grid, self.state.current, self.state.prev_dir, self.radius, &mut legal);
        let from = self.grid.point(self.state.current);
        let mut cands = Vec::with_capacity(legal.len());
        for &k in &legal {
            let to = self.grid.point(k);
            let (alpha, sharp) = self.turn(k);
            let collision = self.melted.crosses(from, to);
            cands.push(CandidateAction {
                strategy: Strategy::MinTemp,
                target: k,
                alpha,
                proxy: self.proxy.value(to, self.state.time),
                collision,
                sensitive: sharp && !collision,
            });
        }
        self.legal = legal;
        cands
    }

    /// Feature vector of the current state.
    ///
    /// Layout: normalised position (2), previous direction (2), fraction of
    /// points left (1), the 5x5 window around the agent without its centre
    /// with 1 for visited or off-grid cells (24), then per action
    /// alpha / 180, penalty flag and proxy value (3 x 3). The flag is 1 for
    /// a move that fires the sharp-turn term, 0.5 for a move that collides
    /// with the melted path and 0 otherwise. Missing candidates are padded
    /// with alpha 0, flag 1 and proxy 1.
    pub fn observe(&mut self) -> Observation {
        let mut obs = [0.0; OBS_DIM];
        let bb = self.grid.bbox();
        let p = self.grid.point(self.state.current);
        let norm = |v: f64, lo: f64, span: f64| if span > 0.0 { ((v - lo) / span).clamp(0.0, 1.0) } else { 0.5 };
        obs[0] = norm(p.x, bb.min.x, bb.width());
        obs[1] = norm(p.y, bb.min.y, bb.height());
        if let Some(d) = self.state.prev_dir {
            obs[2] = d.x;
            obs[3] = d.y;
        }
        obs[4] = self.remaining as f64 / self.grid.len() as f64;
        let (ci, cj) = self.grid.coords(self.state.current);
        let mut slot = 5;
        for dj in -2..=2 {
            for di in -2..=2 {
                if di == 0 && dj == 0 {
                    continue;
                }
                obs[slot] = match self.grid.index_of(ci + di, cj + dj) {
                    Some(k) if !self.grid.visited[k] => 0.0,
                    _ => 1.0,
                };
                slot += 1;
            }
        }
        let actions = self.actions();
        for a in 0..N_ACTIONS {
            let base = 29 + 3 * a;
            match actions {
                Some(acts) => {
                    obs[base] = acts[a].alpha / 180.0;
                    obs[base + 1] = if acts[a].sensitive {
                        1.0
                    } else if acts[a].collision {
                        0.5
                    } else {
                        0.0
                    };
                    obs[base + 2] = acts[a].proxy.clamp(0.0, 1.0);
                }
                None => {
                    obs[base] = 0.0;
                    obs[base + 1] = 1.0;
                    obs[base + 2] = 1.0;
                }
            }
        }
        obs
    }

    /// Take action `action`; at a dead end the action is ignored and the
    /// beam jumps to the nearest unvisited point with the laser off.
    pub fn step(&mut self, action: usize) -> Result<StepOutcome, EnvError> {
        if self.is_done() {
            return Err(EnvError::EpisodeDone);
        }
        if action >= N_ACTIONS {
            return Err(EnvError::InvalidAction(action));
        }
        let choice = self.actions().map(|a| a[action]);
        self.apply(choice)
    }

    /// Move to `target`, which must be one of [`Self::candidates`]; at a
    /// dead end the target is ignored as in [`Self::step`].
    pub fn step_to(&mut self, target: usize) -> Result<StepOutcome, EnvError> {
        if self.is_done() {
            return Err(EnvError::EpisodeDone);
        }
        let cands = self.candidates();
        if cands.is_empty() {
            return self.apply(None);
        }
        let choice = *cands.iter().find(|c| c.target == target).ok_or(EnvError::InvalidTarget(target))?;
        self.apply(Some(choice))
    }

    fn apply(&mut self, choice: Option<CandidateAction>) -> Result<StepOutcome, EnvError> {
        let current = self.state.current;
        let h = self.grid.hatch();
        let mut reward = RewardBreakdown::default();
        let (target, kind) = match choice {
            Some(a) => {
                if a.collision {
                    let n = &mut self.grid.collisions[current];
                    *n += 1;
                    reward.collision = collision_penalty(*n, self.cfg.collision_threshold);
                    self.summary.collisions += 1;
                    (a.target, MoveKind::CollisionVoid)
                } else {
                    (a.target, MoveKind::Laser)
                }
            }
            None => {
                let t = nearest_fallback(&self.grid, current, self.max_len).ok_or(EnvError::EpisodeDone)?;
                (t, MoveKind::FallbackVoid)
            }
        };
        let from = self.grid.point(current);
        let to = self.grid.point(target);
        let len = from.dist(to);
        let (alpha, fires) = self.turn(target);
        let laser = kind.laser_on();
        if laser {
            if self.state.arrived_laser && alpha < 90.0 {
                if fires {
                    let at = self.state.last_sharp.expect("fires implies a previous sharp turn");
                    reward.main = reward_main(alpha, self.state.arc - at, h);
                    self.summary.sensitive += 1;
                }
                self.state.last_sharp = Some(self.state.arc);
            }
            self.state.arc += len;
            self.melted.insert(Segment::new(from, to, true));
        } else {
            self.state.last_sharp = None;
        }
        let mut isolated = !laser && !self.state.arrived_laser;
        if isolated {
            self.summary.isolated += 1;
        }
        self.state.time += len / self.cfg.velocity;
        if laser {
            self.proxy.push(to, self.state.time);
        }
        self.state.prev_dir = (to - from).normalized();
        self.state.arrived_laser = laser;
        self.state.current = target;
        self.state.steps += 1;
        self.grid.visited[target] = true;
        self.remaining -= 1;
        self.path.push(target, to, kind);
        self.candidates = None;
        self.actions = None;
        let done = self.remaining == 0;
        if done && !laser {
            self.summary.isolated += 1;
            isolated = true;
        }
        reward.isolated = isolated_penalty(isolated);
        self.summary.total_reward += reward.total();
        self.summary.steps += 1;
        Ok(StepOutcome { target, kind, reward, done })
    }
}
