use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::network::{Gradients, QNetwork, Workspace};
use super::optim::Optimizer;
use super::replay::{ReplayMemory, Transition};
use super::{bellman_target, epsilon, LearnerError, TrainConfig};
use crate::env::{EnvConfig, EpisodeSummary, ScanEnv};
use crate::geometry::SampleGrid;
use crate::toolpath::Toolpath;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpisodeLog {
    pub episode: usize,
    pub total_reward: f64,
    pub sensitive: usize,
    pub collisions: usize,
    pub isolated: usize,
    pub steps: usize,
    pub epsilon: f64,
    /// Gradient updates made during the episode.
    pub updates: usize,
    /// Mean and max minibatch loss over those updates (0 without updates).
    pub mean_loss: f64,
    pub max_loss: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainingLog {
    pub episodes: Vec<EpisodeLog>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    /// Best network found by periodic greedy evaluation (or the final one).
    pub policy: QNetwork,
    pub final_net: QNetwork,
    pub log: TrainingLog,
    /// Episode after which `policy` was captured.
    pub policy_episode: usize,
    /// Greedy summary of `policy`.
    pub policy_summary: EpisodeSummary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rollout {
    pub path: Toolpath,
    pub summary: EpisodeSummary,
}

/// Reusable buffers for minibatch updates.
#[derive(Debug, Default)]
struct Updater {
    online: Workspace,
    target: Workspace,
    inputs: Vec<f64>,
    next_inputs: Vec<f64>,
    actions: Vec<usize>,
    targets: Vec<f64>,
    grads: Option<Gradients>,
    count: usize,
}

impl Updater {
    fn step(
        &mut self,
        net: &mut QNetwork,
        target_net: &QNetwork,
        opt: &mut Optimizer,
        batch: &[&Transition],
        gamma: f64,
    ) -> Result<f64, LearnerError> {
        let n = batch.len();
        let dim = net.input_dim();
        if n == 0 {
            return Err(LearnerError::EmptyBatch);
        }
        self.inputs.clear();
        self.next_inputs.clear();
        self.actions.clear();
        for t in batch {
            if t.obs.len() != dim || t.next_obs.len() != dim {
                return Err(LearnerError::DimensionMismatch { expected: dim, got: t.obs.len().max(t.next_obs.len()) });
            }
            if t.action >= net.output_dim() {
                return Err(LearnerError::ShapeMismatch("action index exceeds network outputs"));
            }
            self.inputs.extend_from_slice(&t.obs);
            self.next_inputs.extend_from_slice(&t.next_obs);
            self.actions.push(t.action);
        }
        target_net.forward_batch(&self.next_inputs, n, &mut self.target);
        let out = target_net.output_dim();
        let q_next = self.target.acts.last().expect("output activations");
        self.targets.clear();
        for (s, t) in batch.iter().enumerate() {
            self.targets.push(bellman_target(t.reward, &q_next[s * out..(s + 1) * out], t.terminal, gamma));
        }
        let grads = self.grads.get_or_insert_with(|| Gradients::zeros_like(net));
        let loss = net.backprop(&self.inputs, &self.actions, &self.targets, &mut self.online, grads);
        self.count += 1;
        if !loss.is_finite() || !grads.is_finite() {
            let max_abs = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            return Err(LearnerError::NonFiniteLoss {
                loss,
                update: self.count,
                max_target: max_abs(&self.targets),
                max_q: max_abs(self.online.acts.last().map_or(&[][..], |v| v.as_slice())),
            });
        }
        opt.apply(net, grads);
        Ok(loss)
    }
}

/// One minibatch update of `net` towards Bellman targets from `target_net`.
/// Returns the loss before the update.
pub fn train_step(
    net: &mut QNetwork,
    target_net: &QNetwork,
    opt: &mut Optimizer,
    batch: &[&Transition],
    gamma: f64,
) -> Result<f64, LearnerError> {
    Updater::default().step(net, target_net, opt, batch, gamma)
}

fn greedy_episode(policy: &QNetwork, env: &mut ScanEnv) -> Result<(), LearnerError> {
    env.reset();
    while !env.is_done() {
        let obs = env.observe();
        let a = policy.greedy_action(&obs)?;
        env.step(a)?;
    }
    Ok(())
}

/// Deterministic epsilon = 0 episode of `policy` on `grid` from fresh
/// collision counters.
pub fn greedy_rollout(policy: &QNetwork, grid: &SampleGrid, cfg: &EnvConfig) -> Result<Rollout, LearnerError> {
    let mut grid = grid.clone();
    grid.reset_collisions();
    let mut env = ScanEnv::new(grid, *cfg)?;
    greedy_episode(policy, &mut env)?;
    Ok(Rollout { path: env.path().clone(), summary: *env.summary() })
}

/// Online and target networks with their optimiser, replay memory and
/// random stream.
#[derive(Debug)]
pub struct Agent {
    net: QNetwork,
    target: QNetwork,
    opt: Optimizer,
    replay: ReplayMemory,
    updater: Updater,
    rng: ChaCha8Rng,
    batch_size: usize,
    gamma: f64,
    target_update: usize,
    steps: usize,
}

impl Agent {
    pub fn new(cfg: &TrainConfig) -> Result<Self, LearnerError> {
        cfg.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let net = QNetwork::new(&cfg.dims(), &mut rng)?;
        Ok(Self {
            target: net.clone(),
            opt: Optimizer::new(cfg.optimizer, cfg.learning_rate, &net),
            net,
            replay: ReplayMemory::new(cfg.replay_capacity),
            updater: Updater::default(),
            rng,
            batch_size: cfg.batch_size,
            gamma: cfg.gamma,
            target_update: cfg.target_update,
            steps: 0,
        })
    }

    pub fn online(&self) -> &QNetwork {
        &self.net
    }

    pub fn target(&self) -> &QNetwork {
        &self.target
    }

    pub fn replay(&self) -> &ReplayMemory {
        &self.replay
    }

    /// Environment steps recorded so far.
    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Epsilon-greedy action: uniform with probability `eps`, else the
    /// online argmax.
    pub fn act(&mut self, obs: &[f64], eps: f64) -> Result<usize, LearnerError> {
        if self.rng.random::<f64>() < eps {
            Ok(self.rng.random_range(0..self.net.output_dim()))
        } else {
            self.net.greedy_action(obs)
        }
    }

    /// Store a transition, make one minibatch update once the memory holds
    /// a full batch, and sync the target network every `target_update`
    /// steps. Returns the update's loss.
    pub fn record(&mut self, t: Transition) -> Result<Option<f64>, LearnerError> {
        self.replay.push(t);
        let mut loss = None;
        if self.replay.len() >= self.batch_size {
            let batch = self.replay.sample(self.batch_size, &mut self.rng);
            loss = Some(self.updater.step(&mut self.net, &self.target, &mut self.opt, &batch, self.gamma)?);
        }
        self.steps += 1;
        if self.steps.is_multiple_of(self.target_update) {
            self.target.copy_from(&self.net);
        }
        Ok(loss)
    }
}

/// Train with no per-episode callback.
pub fn train(env: &mut ScanEnv, cfg: &TrainConfig) -> Result<TrainOutcome, LearnerError> {
    train_with(env, cfg, |_, _| {})
}

/// Train on `env`, calling `observe` after every episode with its log and
/// the path it produced.
pub fn train_with<F>(env: &mut ScanEnv, cfg: &TrainConfig, mut observe: F) -> Result<TrainOutcome, LearnerError>
where
    F: FnMut(&EpisodeLog, &Toolpath),
{
    if env.grid().len() < 2 {
        return Err(LearnerError::InvalidConfig("environment needs at least two points"));
    }
    let mut agent = Agent::new(cfg)?;
    let mut log = TrainingLog::default();
    let mut best: Option<(QNetwork, usize, EpisodeSummary)> = None;

    for episode in 0..cfg.episodes {
        let eps = epsilon(episode, cfg);
        env.reset();
        let mut obs = env.observe().to_vec();
        let (mut updates, mut loss_sum, mut loss_max) = (0usize, 0.0f64, 0.0f64);
        while !env.is_done() {
            let action = agent.act(&obs, eps)?;
            let outcome = env.step(action)?;
            let next = env.observe().to_vec();
            let t = Transition {
                obs: core::mem::replace(&mut obs, next.clone()),
                action,
                reward: outcome.reward.total(),
                next_obs: next,
                terminal: outcome.done,
            };
            if let Some(loss) = agent.record(t)? {
                updates += 1;
                loss_sum += loss;
                loss_max = loss_max.max(loss);
            }
        }
        let s = *env.summary();
        let entry = EpisodeLog {
            episode,
            total_reward: s.total_reward,
            sensitive: s.sensitive,
            collisions: s.collisions,
            isolated: s.isolated,
            steps: s.steps,
            epsilon: eps,
            updates,
            mean_loss: if updates > 0 { loss_sum / updates as f64 } else { 0.0 },
            max_loss: loss_max,
        };
        observe(&entry, env.path());
        log.episodes.push(entry);

        let last = episode + 1 == cfg.episodes;
        if cfg.eval_every > 0 && ((episode + 1) % cfg.eval_every == 0 || last) {
            let summary = evaluate(agent.online(), env)?;
            let better = best.as_ref().is_none_or(|(_, _, b)| {
                summary.total_reward > b.total_reward
                    || (summary.total_reward == b.total_reward && summary.sensitive < b.sensitive)
            });
            if better {
                best = Some((agent.online().clone(), episode, summary));
            }
        }
    }

    let final_net = agent.online().clone();
    let (policy, policy_episode, policy_summary) = match best {
        Some(b) => b,
        None => {
            let summary = evaluate(&final_net, env)?;
            (final_net.clone(), cfg.episodes.saturating_sub(1), summary)
        }
    };
    env.reset();
    Ok(TrainOutcome { policy, final_net, log, policy_episode, policy_summary })
}

/// Greedy summary of `net` on a copy of `env` with fresh collision counters.
fn evaluate(net: &QNetwork, env: &ScanEnv) -> Result<EpisodeSummary, LearnerError> {
    let mut probe = env.clone();
    probe.reset_collisions();
    greedy_episode(net, &mut probe)?;
    Ok(*probe.summary())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{sample_uniform, Point2, PolygonDomain};
    use crate::learner::OptimizerKind;
    use alloc::vec;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn random_batch(r: &mut ChaCha8Rng, n: usize, dim: usize) -> Vec<Transition> {
        (0..n)
            .map(|_| Transition {
                obs: (0..dim).map(|_| r.random_range(-1.0..1.0)).collect(),
                action: r.random_range(0..3),
                reward: -r.random_range(0.0..1.0),
                next_obs: (0..dim).map(|_| r.random_range(-1.0..1.0)).collect(),
                terminal: r.random_bool(0.2),
            })
            .collect()
    }

    #[test]
    fn fixed_point_batch_has_zero_loss() {
        let mut r = rng(3);
        let mut net = QNetwork::new(&[6, 8, 8, 3], &mut r).unwrap();
        let batch: Vec<Transition> = random_batch(&mut r, 10, 6)
            .into_iter()
            .map(|mut t| {
                t.terminal = true;
                t.reward = net.forward(&t.obs).unwrap()[t.action];
                t
            })
            .collect();
        let refs: Vec<&Transition> = batch.iter().collect();
        let before = net.clone();
        let mut opt = Optimizer::new(OptimizerKind::Adam, 0.001, &net);
        let target = net.clone();
        let loss = train_step(&mut net, &target, &mut opt, &refs, 0.99).unwrap();
        assert_eq!(loss, 0.0);
        assert_eq!(net, before);
    }

    #[test]
    fn loss_decreases_on_frozen_batch() {
        let mut r = rng(4);
        let mut net = QNetwork::new(&[6, 8, 8, 3], &mut r).unwrap();
        let target = net.clone();
        let batch = random_batch(&mut r, 32, 6);
        let refs: Vec<&Transition> = batch.iter().collect();
        let mut opt = Optimizer::new(OptimizerKind::Adam, 0.01, &net);
        let first = train_step(&mut net, &target, &mut opt, &refs, 0.9).unwrap();
        let mut last = first;
        for _ in 0..100 {
            last = train_step(&mut net, &target, &mut opt, &refs, 0.9).unwrap();
        }
        assert!(last < 0.5 * first, "{first} -> {last}");
    }

    #[test]
    fn non_finite_loss_is_reported() {
        let mut r = rng(5);
        let mut net = QNetwork::new(&[6, 8, 3], &mut r).unwrap();
        let target = net.clone();
        let mut batch = random_batch(&mut r, 4, 6);
        batch[0].reward = f64::NAN;
        let refs: Vec<&Transition> = batch.iter().collect();
        let mut opt = Optimizer::new(OptimizerKind::Sgd, 0.1, &net);
        assert!(matches!(train_step(&mut net, &target, &mut opt, &refs, 0.9), Err(LearnerError::NonFiniteLoss { .. })));
        assert!(matches!(train_step(&mut net, &target, &mut opt, &[], 0.9), Err(LearnerError::EmptyBatch)));
    }

    #[test]
    fn strip_rollout_is_straight_and_free() {
        let row = (0..10).map(|i| (i, 0)).collect();
        let grid = SampleGrid::from_lattice(0.05, Point2::new(0.0, 0.0), row, None).unwrap();
        let net = QNetwork::new(&[38, 16, 3], &mut rng(1)).unwrap();
        let roll = greedy_rollout(&net, &grid, &EnvConfig::default()).unwrap();
        assert_eq!(roll.summary.total_reward, 0.0);
        assert_eq!(roll.path.void_moves(), 0);
        assert!(roll.path.visit_counts(grid.len()).iter().all(|&c| c == 1));
        let again = greedy_rollout(&net, &grid, &EnvConfig::default()).unwrap();
        assert_eq!(roll, again);
    }

    #[test]
    fn target_tracks_online_only_at_syncs() {
        let cfg = TrainConfig { hidden: vec![8], batch_size: 4, replay_capacity: 20, target_update: 5, ..Default::default() };
        let mut agent = Agent::new(&cfg).unwrap();
        let mut r = rng(8);
        let initial = agent.online().clone();
        let mut frozen = initial.clone();
        for t in random_batch(&mut r, 40, 38) {
            agent.record(t).unwrap();
            assert!(agent.replay().len() <= 20);
            if agent.steps().is_multiple_of(5) {
                assert_eq!(agent.target(), agent.online());
                frozen = agent.target().clone();
            } else {
                assert_eq!(agent.target(), &frozen);
            }
        }
        assert_ne!(agent.online(), &initial);
    }

    #[test]
    fn short_training_is_deterministic() {
        let dom = PolygonDomain::rectangle(0.0, 0.0, 0.3, 0.3).unwrap();
        let grid = sample_uniform(&dom, 0.05).unwrap();
        let cfg = TrainConfig { episodes: 6, hidden: vec![16], batch_size: 16, eval_every: 2, seed: 9, ..Default::default() };
        let run = || {
            let mut env = ScanEnv::new(grid.clone(), EnvConfig::default()).unwrap();
            train(&mut env, &cfg).unwrap()
        };
        let (a, b) = (run(), run());
        assert_eq!(a, b);
        assert_eq!(a.log.episodes.len(), 6);
        assert!(a.log.episodes.iter().all(|e| e.steps == grid.len() - 1));
        assert!(a.log.episodes.iter().skip(1).any(|e| e.updates > 0));
    }
}
