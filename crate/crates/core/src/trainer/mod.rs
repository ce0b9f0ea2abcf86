//! The self-play training loop.
//!
//! Two agents, each with its own action-value network `Q`, target copy `Q'`
//! and average-policy network `Π`, play complete episodes against each other.
//! At the start of every episode each agent draws a [`PolicyMode`] and keeps
//! it until the episode ends. Every decision stores a transition in the
//! agent's circular memory; decisions taken in best-response mode also go
//! into its reservoir of behavior. Every `update_every` decisions of an agent
//! (once its transition memory holds `min_replay` items) it runs one Q update
//! and one Π update, and copies `Q` into `Q'` every `target_sync_every`
//! Q updates. The opponent average policy `Π'` used by gradient play is the
//! other agent's live `Π`.

mod config;
mod env;
mod nash_gap;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use config::{GameKind, TrainerConfig};
pub use env::{holdem_observation, Environment, HoldemEnv, KuhnEnv, StepReport};
pub use nash_gap::{game_mbb, NashGapTracker};

use crate::engine::NUM_PLAYERS;
use crate::kuhn::{infoset_player, BehavioralPolicy, NUM_CARDS, NUM_INFOSETS};
use crate::memory::{BehaviorTuple, CircularBuffer, ReservoirBuffer, Transition};
use crate::neural::{
    load_checkpoint, policy_loss_batch, q_loss_batch, save_checkpoint, softmax, sync_target, Adam, Checkpoint, Network,
    PolicyBatch, QBatch,
};
use crate::strategy::{
    choose_policy_mode, gradient_play_s, greedy_beta, masked_softmax, MixtureConfig, PolicyMode,
};
use crate::{Error, Result};

pub(crate) use env::bits_mask;

pub const METRICS_HEADER: &str = "episode,hands,gap_mbbh,loss_q_p1,loss_pi_p1,loss_q_p2,loss_pi_p2,eps_explore";

/// splitmix64 of `seed` and a stream index.
pub(crate) fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed.wrapping_add(stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
struct LossTally {
    sum: f64,
    count: u64,
}

impl LossTally {
    fn add(&mut self, v: f64) {
        self.sum += v;
        self.count += 1;
    }

    fn take_mean(&mut self) -> Option<f64> {
        let mean = (self.count > 0).then(|| self.sum / self.count as f64);
        *self = LossTally::default();
        mean
    }
}

/// Learning state of one player.
#[derive(Clone, Debug)]
pub struct Agent<O> {
    pub q: Network,
    pub q_target: Network,
    pub pi: Network,
    adam_q: Adam,
    adam_pi: Adam,
    pub m_rl: CircularBuffer<Transition<O>>,
    pub m_sl: ReservoirBuffer<BehaviorTuple<O>>,
    /// Decisions taken.
    pub steps: u64,
    /// Q updates applied.
    pub updates: u64,
    pub syncs: u64,
    pub pi_updates: u64,
    pub mode: PolicyMode,
    /// Decisions taken in best-response mode; equals the reservoir inserts.
    pub best_response_decisions: u64,
    rng: ChaCha8Rng,
    loss_q: LossTally,
    loss_pi: LossTally,
}

impl<O> Agent<O> {
    fn new(config: &TrainerConfig, seed: u64) -> Result<Self> {
        let q = Network::new(config.q_network.clone(), derive_seed(seed, 1))?;
        let pi = Network::new(config.pi_network.clone(), derive_seed(seed, 2))?;
        Ok(Agent {
            q_target: q.clone(),
            adam_q: Adam::new(config.lr_q, q.num_params()),
            adam_pi: Adam::new(config.lr_pi, pi.num_params()),
            q,
            pi,
            m_rl: CircularBuffer::new(config.rl_capacity)?,
            m_sl: ReservoirBuffer::new(config.sl_capacity, derive_seed(seed, 3))?,
            steps: 0,
            updates: 0,
            syncs: 0,
            pi_updates: 0,
            mode: PolicyMode::Average,
            best_response_decisions: 0,
            rng: ChaCha8Rng::seed_from_u64(derive_seed(seed, 4)),
            loss_q: LossTally::default(),
            loss_pi: LossTally::default(),
        })
    }

    /// Current exploration rate of the best-response mode.
    pub fn epsilon(&self, mixture: &MixtureConfig) -> f64 {
        mixture.epsilon_at(self.steps)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MetricsRow {
    pub episode: u64,
    pub hands: u64,
    pub gap_mbbh: f64,
    pub loss_q: [Option<f64>; NUM_PLAYERS],
    pub loss_pi: [Option<f64>; NUM_PLAYERS],
    pub eps_explore: f64,
}

impl MetricsRow {
    pub fn csv_line(&self) -> String {
        let f = |v: Option<f64>| v.map_or_else(|| "nan".to_string(), |x| format!("{x:.6}"));
        format!(
            "{},{},{:.4},{},{},{},{},{:.6}",
            self.episode,
            self.hands,
            self.gap_mbbh,
            f(self.loss_q[0]),
            f(self.loss_pi[0]),
            f(self.loss_q[1]),
            f(self.loss_pi[1]),
            self.eps_explore
        )
    }
}

/// Result of one episode.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpisodeSummary {
    pub chips: [i64; NUM_PLAYERS],
    pub hands: u64,
    pub modes: [PolicyMode; NUM_PLAYERS],
    pub metrics: Option<(f64, u64)>,
}

struct Pending<O> {
    s: O,
    a: u8,
    r: f64,
}

pub struct Trainer<E: Environment> {
    config: TrainerConfig,
    env: E,
    agents: [Agent<E::Obs>; NUM_PLAYERS],
    rng: ChaCha8Rng,
    episode: u64,
    hands: u64,
    tracker: NashGapTracker,
    metrics: Vec<MetricsRow>,
    input: Vec<f32>,
}

impl<E: Environment> Trainer<E> {
    pub fn new(config: TrainerConfig, env: E) -> Result<Self> {
        config.validate()?;
        if env.input_len() != config.q_network.input_len() || env.num_actions() != config.q_network.outputs {
            return Err(Error::InvalidConfig("networks do not match the environment".into()));
        }
        let agents = [
            Agent::new(&config, derive_seed(config.seed, 100))?,
            Agent::new(&config, derive_seed(config.seed, 200))?,
        ];
        Ok(Trainer {
            rng: ChaCha8Rng::seed_from_u64(derive_seed(config.seed, 0)),
            tracker: NashGapTracker::new(config.metrics_every as usize),
            input: vec![0.0; env.input_len()],
            config,
            env,
            agents,
            episode: 0,
            hands: 0,
            metrics: Vec::new(),
        })
    }

    pub fn config(&self) -> &TrainerConfig {
        &self.config
    }

    pub fn agent(&self, player: usize) -> &Agent<E::Obs> {
        &self.agents[player]
    }

    /// The average-policy network `player` treats as its opponent's, `Π'`.
    pub fn opponent_policy(&self, player: usize) -> &Network {
        &self.agents[1 - player].pi
    }

    pub fn episode(&self) -> u64 {
        self.episode
    }

    pub fn hands(&self) -> u64 {
        self.hands
    }

    pub fn metrics(&self) -> &[MetricsRow] {
        &self.metrics
    }

    pub fn tracker(&self) -> &NashGapTracker {
        &self.tracker
    }

    fn forward(&mut self, net: Net, player: usize, obs: &E::Obs) -> Result<Vec<f64>> {
        self.env.write_input(obs, &mut self.input);
        let network = match net {
            Net::Q => &self.agents[player].q,
            Net::Pi => &self.agents[player].pi,
            Net::OpponentPi => &self.agents[1 - player].pi,
        };
        Ok(network.forward(&self.input)?.into_iter().map(f64::from).collect())
    }

    fn act(&mut self, player: usize, obs: &E::Obs, mask: &[bool]) -> Result<usize> {
        match self.agents[player].mode {
            PolicyMode::Average => {
                let logits = self.forward(Net::Pi, player, obs)?;
                Ok(masked_softmax(&logits, mask)?.sample(&mut self.rng))
            }
            PolicyMode::BestResponse => {
                let q = self.forward(Net::Q, player, obs)?;
                let eps = self.agents[player].epsilon(&self.config.mixture);
                greedy_beta(&q, mask, eps, &mut self.rng)
            }
            PolicyMode::GradientPlay => {
                let pi = masked_softmax(&self.forward(Net::Pi, player, obs)?, mask)?;
                let q = self.forward(Net::Q, player, obs)?;
                let opp = masked_softmax(&self.forward(Net::OpponentPi, player, obs)?, mask)?;
                gradient_play_s(&pi, &q, &opp, mask, self.config.mixture.q_ext, &mut self.rng)
            }
        }
    }

    /// Plays one episode, learning along the way.
    pub fn run_episode(&mut self) -> Result<EpisodeSummary> {
        let seed = derive_seed(self.config.seed ^ 0xE915_0DE5, self.episode);
        self.env.reset(seed)?;
        for p in 0..NUM_PLAYERS {
            self.agents[p].mode = choose_policy_mode(&self.config.mixture, &mut self.rng);
        }
        let mut pending: [Option<Pending<E::Obs>>; NUM_PLAYERS] = [None, None];
        let mut chips = [0i64; NUM_PLAYERS];
        let mut hands = 0u64;
        let scale = self.env.reward_scale();
        let m = self.env.num_actions();
        while let Some(p) = self.env.to_act() {
            let (obs, legal) = self.env.observe(p)?;
            if let Some(prev) = pending[p].take() {
                self.agents[p].m_rl.push(Transition {
                    s: prev.s,
                    a: prev.a,
                    r: prev.r as f32,
                    s_next: obs.clone(),
                    terminal: false,
                    next_legal: legal,
                });
            }
            let mask = bits_mask(legal, m);
            let a = self.act(p, &obs, &mask)?;
            let agent = &mut self.agents[p];
            if agent.mode == PolicyMode::BestResponse {
                agent.m_sl.insert(BehaviorTuple { s: obs.clone(), a: a as u8 });
                agent.best_response_decisions += 1;
            }
            pending[p] = Some(Pending { s: obs, a: a as u8, r: 0.0 });
            agent.steps += 1;
            if agent.steps.is_multiple_of(self.config.update_every) {
                self.training_step(p)?;
            }
            let report = self.env.step(a)?;
            for delta in &report.hands {
                hands += 1;
                for q in 0..NUM_PLAYERS {
                    chips[q] += delta[q];
                    if let Some(pend) = pending[q].as_mut() {
                        pend.r += delta[q] as f64 / scale;
                    }
                }
            }
            if report.episode_over {
                break;
            }
        }
        for (p, slot) in pending.iter_mut().enumerate() {
            if let Some(prev) = slot.take() {
                self.agents[p].m_rl.push(Transition {
                    s: prev.s.clone(),
                    a: prev.a,
                    r: prev.r as f32,
                    s_next: prev.s,
                    terminal: true,
                    next_legal: 0,
                });
            }
        }
        self.episode += 1;
        self.hands += hands;
        let mut metrics = None;
        if let Some(gap) = self.tracker.record(game_mbb(chips, hands, self.env.big_blind())) {
            let row = MetricsRow {
                episode: self.episode,
                hands: self.hands,
                gap_mbbh: gap,
                loss_q: [self.agents[0].loss_q.take_mean(), self.agents[1].loss_q.take_mean()],
                loss_pi: [self.agents[0].loss_pi.take_mean(), self.agents[1].loss_pi.take_mean()],
                eps_explore: self.agents[0].epsilon(&self.config.mixture),
            };
            metrics = Some((gap, self.episode));
            self.metrics.push(row);
        }
        Ok(EpisodeSummary {
            chips,
            hands,
            modes: [self.agents[0].mode, self.agents[1].mode],
            metrics,
        })
    }

    /// One Q update and one Π update for `player`, each skipped while its
    /// memory is below the threshold. Returns the losses of the updates run.
    pub fn training_step(&mut self, player: usize) -> Result<(Option<f64>, Option<f64>)> {
        let cfg = &self.config;
        let env = &self.env;
        let width = env.input_len();
        let agent = &mut self.agents[player];
        if agent.m_rl.len() < cfg.min_replay {
            return Ok((None, None));
        }
        let sample = agent.m_rl.sample(cfg.batch_size, &mut agent.rng)?;
        let n = sample.len();
        let mut batch = QBatch {
            states: vec![0.0; n * width],
            actions: Vec::with_capacity(n),
            rewards: Vec::with_capacity(n),
            next_states: vec![0.0; n * width],
            terminal: Vec::with_capacity(n),
            next_legal: Vec::with_capacity(n),
        };
        for (i, t) in sample.iter().enumerate() {
            env.write_input(&t.s, &mut batch.states[i * width..(i + 1) * width]);
            if !t.terminal {
                env.write_input(&t.s_next, &mut batch.next_states[i * width..(i + 1) * width]);
            }
            batch.actions.push(t.a as usize);
            batch.rewards.push(f64::from(t.r));
            batch.terminal.push(t.terminal);
            batch.next_legal.push(t.next_legal);
        }
        let out = q_loss_batch(&agent.q, &agent.q_target, &batch, cfg.gamma)?;
        agent.adam_q.step(&mut agent.q, &out.grads)?;
        agent.updates += 1;
        agent.loss_q.add(out.loss);
        if agent.updates.is_multiple_of(cfg.target_sync_every) {
            sync_target(&agent.q, &mut agent.q_target)?;
            agent.syncs += 1;
        }
        let loss_q = Some(out.loss);
        if agent.m_sl.is_empty() {
            return Ok((loss_q, None));
        }
        let sample = agent.m_sl.sample(cfg.batch_size, &mut agent.rng)?;
        let mut batch = PolicyBatch {
            states: vec![0.0; sample.len() * width],
            actions: Vec::with_capacity(sample.len()),
        };
        for (i, t) in sample.iter().enumerate() {
            env.write_input(&t.s, &mut batch.states[i * width..(i + 1) * width]);
            batch.actions.push(t.a as usize);
        }
        let out = policy_loss_batch(&agent.pi, &batch)?;
        agent.adam_pi.step(&mut agent.pi, &out.grads)?;
        agent.pi_updates += 1;
        agent.loss_pi.add(out.loss);
        Ok((loss_q, Some(out.loss)))
    }

    /// Networks, counters and the config echo.
    pub fn checkpoint(&self) -> Checkpoint {
        let mut ckpt = Checkpoint::default();
        for (p, agent) in self.agents.iter().enumerate() {
            let id = p + 1;
            ckpt.networks.push((format!("q{id}"), agent.q.clone()));
            ckpt.networks.push((format!("q{id}_target"), agent.q_target.clone()));
            ckpt.networks.push((format!("pi{id}"), agent.pi.clone()));
            ckpt.meta.insert(format!("agent{id}.steps"), agent.steps.to_string());
            ckpt.meta.insert(format!("agent{id}.updates"), agent.updates.to_string());
            ckpt.meta.insert(format!("agent{id}.pi_updates"), agent.pi_updates.to_string());
            ckpt.meta.insert(format!("agent{id}.syncs"), agent.syncs.to_string());
            ckpt.meta.insert(
                format!("agent{id}.eps_explore"),
                agent.epsilon(&self.config.mixture).to_string(),
            );
        }
        ckpt.meta.insert("game".into(), self.config.game.name().into());
        ckpt.meta.insert("episode".into(), self.episode.to_string());
        ckpt.meta.insert("hands".into(), self.hands.to_string());
        for (k, v) in self.config.entries() {
            ckpt.meta.insert(format!("config.{k}"), v);
        }
        ckpt
    }

    /// Rebuilds a trainer from a checkpoint. Networks and counters are
    /// restored; replay memories and optimizer moments start empty.
    pub fn from_checkpoint(ckpt: &Checkpoint, env: E) -> Result<Self> {
        let config = config_from_checkpoint(ckpt)?;
        let mut trainer = Trainer::new(config, env)?;
        for (p, agent) in trainer.agents.iter_mut().enumerate() {
            let id = p + 1;
            agent.q = ckpt.require_network(&format!("q{id}"))?.clone();
            agent.q_target = ckpt.require_network(&format!("q{id}_target"))?.clone();
            agent.pi = ckpt.require_network(&format!("pi{id}"))?.clone();
            agent.steps = ckpt.meta_parse(&format!("agent{id}.steps"))?;
            agent.updates = ckpt.meta_parse(&format!("agent{id}.updates"))?;
            agent.pi_updates = ckpt.meta_parse(&format!("agent{id}.pi_updates"))?;
            agent.syncs = ckpt.meta_parse(&format!("agent{id}.syncs"))?;
        }
        trainer.episode = ckpt.meta_parse("episode")?;
        trainer.hands = ckpt.meta_parse("hands")?;
        // Re-derive the action stream so resumed runs stay deterministic.
        trainer.rng = ChaCha8Rng::seed_from_u64(derive_seed(trainer.config.seed ^ trainer.episode, 0));
        Ok(trainer)
    }
}

#[derive(Clone, Copy)]
enum Net {
    Q,
    Pi,
    OpponentPi,
}

/// The training config echoed into a checkpoint.
pub fn config_from_checkpoint(ckpt: &Checkpoint) -> Result<TrainerConfig> {
    let pairs: Vec<(&str, &str)> = ckpt
        .meta
        .iter()
        .filter_map(|(k, v)| k.strip_prefix("config.").map(|k| (k, v.as_str())))
        .collect();
    if pairs.is_empty() {
        return Err(Error::Format("checkpoint carries no training config".into()));
    }
    TrainerConfig::from_pairs(pairs)
}

/// Average policy of a Kuhn agent pair: player 0's rows from `pi0`,
/// player 1's rows from `pi1`.
pub fn kuhn_average_policy(pi0: &Network, pi1: &Network) -> Result<BehavioralPolicy> {
    let mut policy = BehavioralPolicy::uniform();
    for infoset in 0..NUM_INFOSETS {
        let (card, history) = (infoset % NUM_CARDS, infoset / NUM_CARDS);
        let mut x = [0.0f32; crate::encoding::KUHN_OBS_LEN];
        x[card] = 1.0;
        x[NUM_CARDS + history] = 1.0;
        let net = if infoset_player(infoset) == 0 { pi0 } else { pi1 };
        let logits: Vec<f64> = net.forward(&x)?.into_iter().map(f64::from).collect();
        let p = softmax(&logits);
        policy.table[infoset] = [p[0], p[1]];
    }
    Ok(policy)
}

/// Summary of a finished [`run_training`] call.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainingSummary {
    pub episodes: u64,
    pub hands: u64,
    pub checkpoint: PathBuf,
    pub metrics: PathBuf,
    pub gap_series: Vec<f64>,
}

pub const CHECKPOINT_FILE: &str = "checkpoint.bin";
pub const METRICS_FILE: &str = "metrics.csv";

fn drive<E: Environment>(mut trainer: Trainer<E>, out: &Path, append: bool) -> Result<TrainingSummary> {
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let metrics_path = out.join(METRICS_FILE);
    let ckpt_path = out.join(CHECKPOINT_FILE);
    let mut metrics = fs::OpenOptions::new()
        .create(true)
        .append(append)
        .write(true)
        .truncate(!append)
        .open(&metrics_path)
        .map_err(|e| Error::io(&metrics_path, e))?;
    if !append {
        writeln!(metrics, "{METRICS_HEADER}").map_err(|e| Error::io(&metrics_path, e))?;
    }
    fs::write(out.join("config.txt"), trainer.config.to_string()).map_err(|e| Error::io(out, e))?;
    let every = trainer.config.checkpoint_every;
    let budget = (trainer.config.max_seconds > 0).then(|| Duration::from_secs(trainer.config.max_seconds));
    let start = Instant::now();
    while trainer.episode < trainer.config.episodes && budget.is_none_or(|b| start.elapsed() < b) {
        let summary = trainer.run_episode()?;
        if summary.metrics.is_some() {
            let row = trainer.metrics.last().expect("row just pushed");
            writeln!(metrics, "{}", row.csv_line()).map_err(|e| Error::io(&metrics_path, e))?;
            metrics.flush().map_err(|e| Error::io(&metrics_path, e))?;
        }
        if every > 0 && trainer.episode.is_multiple_of(every) {
            save_checkpoint(&trainer.checkpoint(), &ckpt_path)?;
        }
    }
    save_checkpoint(&trainer.checkpoint(), &ckpt_path)?;
    Ok(TrainingSummary {
        episodes: trainer.episode,
        hands: trainer.hands,
        checkpoint: ckpt_path,
        metrics: metrics_path,
        gap_series: trainer.tracker.series().to_vec(),
    })
}

/// Trains from scratch, writing `checkpoint.bin`, `metrics.csv` and
/// `config.txt` under `out`.
pub fn run_training(config: TrainerConfig, out: impl AsRef<Path>) -> Result<TrainingSummary> {
    match config.game {
        GameKind::Holdem => {
            let env = HoldemEnv::new(config.game_config.clone(), config.mc_samples)?;
            drive(Trainer::new(config, env)?, out.as_ref(), false)
        }
        GameKind::Kuhn => drive(Trainer::new(config, KuhnEnv::new())?, out.as_ref(), false),
    }
}

/// Continues the run saved in `checkpoint` up to `episodes` total (or the
/// configured total), writing next to the checkpoint.
pub fn resume_training(checkpoint: impl AsRef<Path>, episodes: Option<u64>) -> Result<TrainingSummary> {
    let path = checkpoint.as_ref();
    let ckpt = load_checkpoint(path)?;
    let out = path.parent().unwrap_or(Path::new(".")).to_path_buf();
    let mut config = config_from_checkpoint(&ckpt)?;
    if let Some(n) = episodes {
        config.episodes = n;
    }
    match config.game {
        GameKind::Holdem => {
            let env = HoldemEnv::new(config.game_config.clone(), config.mc_samples)?;
            let mut t = Trainer::from_checkpoint(&ckpt, env)?;
            t.config.episodes = config.episodes;
            drive(t, &out, true)
        }
        GameKind::Kuhn => {
            let mut t = Trainer::from_checkpoint(&ckpt, KuhnEnv::new())?;
            t.config.episodes = config.episodes;
            drive(t, &out, true)
        }
    }
}

impl<E: Environment> Trainer<E> {
    /// Draws from the action stream; exposed for statistical tests.
    pub fn sample_mode(&mut self) -> PolicyMode {
        choose_policy_mode(&self.config.mixture, &mut self.rng)
    }

    /// Random 64-bit value from the trainer stream.
    pub fn next_u64(&mut self) -> u64 {
        self.rng.random()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_kuhn(episodes: u64) -> TrainerConfig {
        TrainerConfig {
            episodes,
            min_replay: 50,
            batch_size: 16,
            metrics_every: 100,
            ..TrainerConfig::kuhn()
        }
    }

    #[test]
    fn behavior_only_in_best_response() {
        let mut t = Trainer::new(tiny_kuhn(500), KuhnEnv::new()).unwrap();
        for _ in 0..500 {
            t.run_episode().unwrap();
        }
        for p in 0..2 {
            let a = t.agent(p);
            assert_eq!(a.m_sl.inserts(), a.best_response_decisions);
            assert_eq!(a.m_rl.inserts(), a.steps);
            assert_eq!(a.syncs, a.updates / t.config().target_sync_every);
        }
        assert_eq!(t.metrics().len(), 5);
        assert!(std::ptr::eq(t.opponent_policy(0), &t.agent(1).pi));
    }

    #[test]
    fn deterministic_per_seed() {
        let run = || {
            let mut t = Trainer::new(tiny_kuhn(300), KuhnEnv::new()).unwrap();
            for _ in 0..300 {
                t.run_episode().unwrap();
            }
            (t.metrics().to_vec(), t.agent(0).pi.clone())
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn update_gate() {
        let cfg = TrainerConfig {
            min_replay: 1_000_000,
            rl_capacity: 1_000_000,
            ..tiny_kuhn(50)
        };
        let mut t = Trainer::new(cfg, KuhnEnv::new()).unwrap();
        for _ in 0..50 {
            t.run_episode().unwrap();
        }
        assert_eq!(t.agent(0).updates, 0);
        assert_eq!(t.training_step(0).unwrap(), (None, None));
    }

    #[test]
    fn checkpoint_round_trip() {
        let mut t = Trainer::new(tiny_kuhn(200), KuhnEnv::new()).unwrap();
        for _ in 0..200 {
            t.run_episode().unwrap();
        }
        let bytes = t.checkpoint().to_bytes().unwrap();
        let ckpt = Checkpoint::from_bytes(&bytes).unwrap();
        let back = Trainer::from_checkpoint(&ckpt, KuhnEnv::new()).unwrap();
        assert_eq!(back.agent(1).pi, t.agent(1).pi);
        assert_eq!(back.agent(0).steps, t.agent(0).steps);
        assert_eq!(back.episode(), 200);
        let p = kuhn_average_policy(&back.agent(0).pi, &back.agent(1).pi).unwrap();
        p.validate().unwrap();
    }
}
