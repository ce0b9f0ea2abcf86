//! Baseline players and match evaluation.

use std::fmt;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cards::{equity_mc, DEFAULT_MC_SAMPLES};
use crate::encoding::CardFrame;
use crate::engine::{new_game, ActionKind, GameConfig, GameState, NUM_ACTIONS, NUM_PLAYERS};
use crate::neural::{load_checkpoint, Checkpoint, Network};
use crate::strategy::{legal_argmax, masked_softmax};
use crate::trainer::{config_from_checkpoint, holdem_observation, GameKind};
use crate::{Error, Result};

/// Anything that can sit at a hold'em table.
pub trait Player {
    fn name(&self) -> String;

    /// Called before every game with a seed private to this seat and game.
    fn reset(&mut self, seed: u64);

    /// Picks a legal action for `seat`, which must be to act.
    fn act(&mut self, state: &GameState, seat: usize) -> Result<ActionKind>;
}

fn check_turn(state: &GameState, seat: usize) -> Result<[bool; NUM_ACTIONS]> {
    if state.is_game_over() {
        return Err(Error::Terminal);
    }
    if state.to_act() != seat {
        return Err(Error::IllegalAction(format!("seat {seat} is not to act")));
    }
    state.legal_mask()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum BaselineKind {
    Call,
    Random,
    HeuristicMc,
    AlwaysFold,
}

impl BaselineKind {
    pub const ALL: [BaselineKind; 4] = [
        BaselineKind::Call,
        BaselineKind::Random,
        BaselineKind::HeuristicMc,
        BaselineKind::AlwaysFold,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BaselineKind::Call => "CALL",
            BaselineKind::Random => "RANDOM",
            BaselineKind::HeuristicMc => "HEURISTIC_MC",
            BaselineKind::AlwaysFold => "ALWAYS_FOLD",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        let norm = s.replace('-', "_");
        Self::ALL.into_iter().find(|k| k.name().eq_ignore_ascii_case(&norm))
    }
}

impl fmt::Display for BaselineKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Thresholds of the Monte-Carlo heuristic player.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeuristicParams {
    pub mc_samples: usize,
    pub pot_raise_above: f64,
    pub all_in_above: f64,
}

impl Default for HeuristicParams {
    fn default() -> Self {
        HeuristicParams {
            mc_samples: DEFAULT_MC_SAMPLES,
            pot_raise_above: 0.7,
            all_in_above: 0.9,
        }
    }
}

/// Probabilities of the RANDOM player before renormalizing over what is
/// legal: check/call, any raise (split evenly across raise sizes), fold.
pub const RANDOM_WEIGHTS: (f64, f64, f64) = (0.6, 0.2, 0.2);

#[derive(Clone, Debug)]
pub struct BaselinePlayer {
    pub kind: BaselineKind,
    pub params: HeuristicParams,
    rng: ChaCha8Rng,
}

impl BaselinePlayer {
    pub fn new(kind: BaselineKind) -> Self {
        BaselinePlayer {
            kind,
            params: HeuristicParams::default(),
            rng: ChaCha8Rng::seed_from_u64(0),
        }
    }

    pub fn with_params(kind: BaselineKind, params: HeuristicParams) -> Self {
        BaselinePlayer {
            params,
            ..Self::new(kind)
        }
    }

    /// The action distribution of the RANDOM player under `mask`.
    pub fn random_distribution(mask: &[bool; NUM_ACTIONS]) -> [f64; NUM_ACTIONS] {
        let (call, raise, fold) = RANDOM_WEIGHTS;
        let mut w = [0.0; NUM_ACTIONS];
        if mask[ActionKind::Fold.index()] {
            w[ActionKind::Fold.index()] = fold;
        }
        w[ActionKind::CheckCall.index()] = call;
        let raises: Vec<usize> = ActionKind::ALL
            .iter()
            .filter(|k| k.is_raise() && mask[k.index()])
            .map(|k| k.index())
            .collect();
        for &r in &raises {
            w[r] = raise / raises.len() as f64;
        }
        let total: f64 = w.iter().sum();
        w.map(|x| x / total)
    }

    fn heuristic(&mut self, state: &GameState, seat: usize, mask: &[bool; NUM_ACTIONS]) -> Result<ActionKind> {
        let view = state.view(seat);
        let equity = equity_mc(&view.hole(), view.board(), self.params.mc_samples, self.rng.random())?.win_rate;
        let to_call = f64::from(view.to_call());
        let break_even = to_call / (f64::from(view.pot_total()) + to_call);
        let wanted = if to_call > 0.0 && equity < break_even {
            ActionKind::Fold
        } else if equity > self.params.all_in_above {
            ActionKind::AllIn
        } else if equity > self.params.pot_raise_above {
            ActionKind::RaisePot
        } else {
            ActionKind::CheckCall
        };
        Ok(if mask[wanted.index()] { wanted } else { ActionKind::CheckCall })
    }
}

impl Player for BaselinePlayer {
    fn name(&self) -> String {
        self.kind.name().to_string()
    }

    fn reset(&mut self, seed: u64) {
        self.rng = ChaCha8Rng::seed_from_u64(seed);
    }

    fn act(&mut self, state: &GameState, seat: usize) -> Result<ActionKind> {
        let mask = check_turn(state, seat)?;
        match self.kind {
            BaselineKind::Call => Ok(ActionKind::CheckCall),
            BaselineKind::AlwaysFold => Ok(if mask[ActionKind::Fold.index()] {
                ActionKind::Fold
            } else {
                ActionKind::CheckCall
            }),
            BaselineKind::Random => {
                let dist = Self::random_distribution(&mask);
                let u: f64 = self.rng.random();
                let mut acc = 0.0;
                for (i, p) in dist.iter().enumerate() {
                    acc += p;
                    if u < acc && *p > 0.0 {
                        return ActionKind::from_index(i);
                    }
                }
                Ok(ActionKind::CheckCall)
            }
            BaselineKind::HeuristicMc => self.heuristic(state, seat, &mask),
        }
    }
}

/// How a trained network picks among its outputs.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Deployment {
    /// Sample from the average policy.
    #[default]
    Sample,
    /// Take the most likely legal action.
    Greedy,
}

/// A player driven by an average-policy network from a checkpoint.
#[derive(Clone, Debug)]
pub struct NetworkPlayer {
    label: String,
    pi: Network,
    mc_samples: usize,
    pub deployment: Deployment,
    prev_frames: [CardFrame; NUM_PLAYERS],
    rng: ChaCha8Rng,
    input: Vec<f32>,
}

impl NetworkPlayer {
    pub fn new(label: impl Into<String>, pi: Network, mc_samples: usize) -> Result<Self> {
        if pi.input_len() != crate::encoding::OBS_LEN || pi.output_len() != NUM_ACTIONS {
            return Err(Error::InvalidInput("network does not fit the hold'em observation".into()));
        }
        Ok(NetworkPlayer {
            label: label.into(),
            input: vec![0.0; pi.input_len()],
            pi,
            mc_samples,
            deployment: Deployment::Sample,
            prev_frames: [CardFrame::empty(); NUM_PLAYERS],
            rng: ChaCha8Rng::seed_from_u64(0),
        })
    }

    /// Uses agent `agent` (1 or 2) of a hold'em training checkpoint.
    pub fn from_checkpoint(ckpt: &Checkpoint, agent: usize, label: impl Into<String>) -> Result<Self> {
        let config = config_from_checkpoint(ckpt)?;
        if config.game != GameKind::Holdem {
            return Err(Error::InvalidInput("checkpoint was not trained on hold'em".into()));
        }
        if !(1..=NUM_PLAYERS).contains(&agent) {
            return Err(Error::InvalidInput(format!("agent {agent} is not 1 or 2")));
        }
        let pi = ckpt.require_network(&format!("pi{agent}"))?.clone();
        Self::new(label, pi, config.mc_samples)
    }

    pub fn load(path: impl AsRef<Path>, agent: usize) -> Result<Self> {
        let path = path.as_ref();
        let ckpt = load_checkpoint(path)?;
        Self::from_checkpoint(&ckpt, agent, path.display().to_string())
    }

    pub fn network(&self) -> &Network {
        &self.pi
    }

    /// Average-policy distribution at the current decision of `seat`.
    /// Advances the remembered card frame, so call it once per decision.
    pub fn policy(&mut self, state: &GameState, seat: usize) -> Result<Vec<f64>> {
        check_turn(state, seat)?;
        let (obs, bits) = holdem_observation(state, seat, &self.prev_frames[seat], self.mc_samples)?;
        self.prev_frames[seat] = obs.current;
        obs.write_tensor(&mut self.input);
        let logits: Vec<f64> = self.pi.forward(&self.input)?.into_iter().map(f64::from).collect();
        let mask: Vec<bool> = (0..NUM_ACTIONS).map(|i| bits >> i & 1 == 1).collect();
        Ok(masked_softmax(&logits, &mask)?.probs().to_vec())
    }
}

impl Player for NetworkPlayer {
    fn name(&self) -> String {
        self.label.clone()
    }

    fn reset(&mut self, seed: u64) {
        self.rng = ChaCha8Rng::seed_from_u64(seed);
        self.prev_frames = [CardFrame::empty(); NUM_PLAYERS];
    }

    fn act(&mut self, state: &GameState, seat: usize) -> Result<ActionKind> {
        let probs = self.policy(state, seat)?;
        let mask = state.legal_mask()?;
        let index = match self.deployment {
            Deployment::Greedy => legal_argmax(&probs, &mask),
            Deployment::Sample => crate::strategy::sample_index(&probs, &mut self.rng),
        };
        ActionKind::from_index(index)
    }
}

/// Outcome of a match from the point of view of both entrants.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatchResult {
    pub names: [String; 2],
    pub games: u64,
    pub hands: u64,
    pub duplicate: bool,
    pub big_blind: u32,
    pub mbb_per_hand: [f64; 2],
    pub average_final_stack: [f64; 2],
    /// Share of games finished with more chips than the opponent.
    pub win_rate: [f64; 2],
    /// 95% half-width of entrant A's mbb/h.
    pub ci_half_width: f64,
    /// Entrant A's chip delta of every hand, in play order.
    pub hand_deltas: Vec<i64>,
}

impl MatchResult {
    /// Whether A's mbb/h is above zero at 95% confidence.
    pub fn a_significantly_ahead(&self) -> bool {
        self.mbb_per_hand[0] - self.ci_half_width > 0.0
    }

    pub fn summary(&self) -> String {
        format!(
            "a = {}\nb = {}\ngames = {}\nhands = {}\nduplicate = {}\nmbb_per_hand_a = {:.2}\nmbb_per_hand_b = {:.2}\n\
             ci95_mbb = {:.2}\navg_final_stack_a = {:.2}\navg_final_stack_b = {:.2}\nwin_rate_a = {:.4}\nwin_rate_b = {:.4}",
            self.names[0],
            self.names[1],
            self.games,
            self.hands,
            self.duplicate,
            self.mbb_per_hand[0],
            self.mbb_per_hand[1],
            self.ci_half_width,
            self.average_final_stack[0],
            self.average_final_stack[1],
            self.win_rate[0],
            self.win_rate[1],
        )
    }
}

/// Normal-approximation 95% half-width of the mean of `deltas`, in mbb/h.
pub fn confidence_interval(deltas: &[i64], big_blind: u32) -> Result<f64> {
    let n = deltas.len();
    if n < 2 {
        return Err(Error::InvalidInput(format!("need at least 2 hands, got {n}")));
    }
    let mean = deltas.iter().sum::<i64>() as f64 / n as f64;
    let var = deltas.iter().map(|&d| (d as f64 - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    Ok(1.96 * 1000.0 * var.sqrt() / (f64::from(big_blind) * (n as f64).sqrt()))
}

/// Plays one game, returning seat deltas per hand and final stacks.
pub fn play_game(
    config: GameConfig,
    seats: [&mut dyn Player; NUM_PLAYERS],
) -> Result<(Vec<[i64; NUM_PLAYERS]>, [u32; NUM_PLAYERS])> {
    let mut state = new_game(config)?;
    let mut deltas = Vec::new();
    let [s0, s1] = seats;
    while !state.is_game_over() {
        let seat = state.to_act();
        let player: &mut dyn Player = if seat == 0 { &mut *s0 } else { &mut *s1 };
        let kind = player.act(&state, seat)?;
        deltas.extend(state.apply_in_place(kind)?.into_iter().map(|r| r.chip_delta));
    }
    Ok((deltas, state.stacks()))
}

fn mix(seed: u64, a: u64, b: u64) -> u64 {
    crate::trainer::derive_seed(crate::trainer::derive_seed(seed, a), b)
}

/// Plays `n_games` games between `a` and `b`.
///
/// With `duplicate`, games come in pairs that share a deal seed with the
/// seats swapped, and each seat draws its private randomness from a stream
/// keyed by deal and seat, so identical players exactly cancel. `n_games`
/// must then be even. Otherwise `a` takes seat `g % 2` in game `g`.
pub fn play_match(
    a: &mut dyn Player,
    b: &mut dyn Player,
    n_games: u64,
    config: &GameConfig,
    seed: u64,
    duplicate: bool,
) -> Result<MatchResult> {
    if n_games == 0 {
        return Err(Error::InvalidInput("a match needs at least one game".into()));
    }
    if duplicate && n_games % 2 == 1 {
        return Err(Error::InvalidInput("duplicate matches need an even number of games".into()));
    }
    config.validate()?;
    let mut hand_deltas = Vec::new();
    let mut stacks = [0.0f64; 2];
    let mut wins = [0u64; 2];
    for g in 0..n_games {
        let deal = if duplicate { g / 2 } else { g };
        let a_seat = (g % 2) as usize;
        let game_config = GameConfig {
            seed: mix(seed, deal, 0),
            ..config.clone()
        };
        let seat_seed = |seat: usize| mix(seed, deal, 1 + seat as u64);
        let (deltas, final_stacks) = if a_seat == 0 {
            a.reset(seat_seed(0));
            b.reset(seat_seed(1));
            play_game(game_config, [&mut *a, &mut *b])?
        } else {
            b.reset(seat_seed(0));
            a.reset(seat_seed(1));
            play_game(game_config, [&mut *b, &mut *a])?
        };
        hand_deltas.extend(deltas.iter().map(|d| d[a_seat]));
        let (sa, sb) = (final_stacks[a_seat], final_stacks[1 - a_seat]);
        stacks[0] += f64::from(sa);
        stacks[1] += f64::from(sb);
        if sa > sb {
            wins[0] += 1;
        } else if sb > sa {
            wins[1] += 1;
        }
    }
    let bb = config.big_blind();
    let hands = hand_deltas.len() as u64;
    let mbb_a = crate::engine::mbb_per_hand(hand_deltas.iter().sum(), hands, bb)?;
    let ci = if hands >= 2 { confidence_interval(&hand_deltas, bb)? } else { f64::NAN };
    let n = n_games as f64;
    Ok(MatchResult {
        names: [a.name(), b.name()],
        games: n_games,
        hands,
        duplicate,
        big_blind: bb,
        mbb_per_hand: [mbb_a, -mbb_a],
        average_final_stack: [stacks[0] / n, stacks[1] / n],
        win_rate: [wins[0] as f64 / n, wins[1] as f64 / n],
        ci_half_width: ci,
        hand_deltas,
    })
}

/// Builds a player from a baseline name or a checkpoint path; a checkpoint
/// may carry an `@2` suffix to pick its second agent.
pub fn player_from_spec(spec: &str) -> Result<Box<dyn Player>> {
    if let Some(kind) = BaselineKind::parse(spec) {
        return Ok(Box::new(BaselinePlayer::new(kind)));
    }
    let (path, agent) = match spec.rsplit_once('@') {
        Some((p, n)) => (
            p,
            n.parse()
                .map_err(|_| Error::InvalidInput(format!("bad agent suffix in {spec:?}")))?,
        ),
        None => (spec, 1),
    };
    Ok(Box::new(NetworkPlayer::load(path, agent)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_distribution_renormalizes() {
        let all = [true; NUM_ACTIONS];
        let d = BaselinePlayer::random_distribution(&all);
        assert!((d[0] - 0.2).abs() < 1e-12 && (d[1] - 0.6).abs() < 1e-12);
        assert!((d[2] - 0.2 / 3.0).abs() < 1e-12);
        let free = [false, true, true, true, true];
        let d = BaselinePlayer::random_distribution(&free);
        assert!((d[1] - 0.75).abs() < 1e-12 && d[0] == 0.0);
        let no_raise = [true, true, false, false, false];
        let d = BaselinePlayer::random_distribution(&no_raise);
        assert!((d[0] - 0.25).abs() < 1e-12);
    }

    #[test]
    fn ci_closed_form() {
        assert_eq!(confidence_interval(&[3, 3, 3], 10).unwrap(), 0.0);
        assert!(confidence_interval(&[1], 10).is_err());
        let coin: Vec<i64> = (0..10_000).map(|i| if i % 2 == 0 { 10 } else { -10 }).collect();
        let expected = 19.6 * (10_000.0f64 / 9_999.0).sqrt();
        assert!((confidence_interval(&coin, 10).unwrap() - expected).abs() < 1e-9);
    }

    #[test]
    fn self_play_cancels() {
        let mut a = BaselinePlayer::new(BaselineKind::Random);
        let mut b = BaselinePlayer::new(BaselineKind::Random);
        let r = play_match(&mut a, &mut b, 20, &GameConfig::default(), 3, true).unwrap();
        assert_eq!(r.hand_deltas.iter().sum::<i64>(), 0);
        assert_eq!(r.mbb_per_hand, [0.0, 0.0]);
        assert!(play_match(&mut a, &mut b, 3, &GameConfig::default(), 3, true).is_err());
    }

    #[test]
    fn parse_kinds() {
        assert_eq!(BaselineKind::parse("heuristic-mc"), Some(BaselineKind::HeuristicMc));
        assert_eq!(BaselineKind::parse("call"), Some(BaselineKind::Call));
        assert_eq!(BaselineKind::parse("x.bin"), None);
    }
}
