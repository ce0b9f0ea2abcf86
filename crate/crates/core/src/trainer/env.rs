use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::encoding::{build_scalars, decision_seed, encode, kuhn_features, CardFrame, Observation, KUHN_OBS_LEN, OBS_LEN};
use crate::engine::{new_game, ActionKind, GameConfig, GameState, NUM_ACTIONS, NUM_PLAYERS};
use crate::kuhn::{kuhn_transition, KuhnAction, KuhnState, DEALS, NUM_KUHN_ACTIONS};
use crate::{Error, Result};

/// What one action did to the episode.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct StepReport {
    /// Chip deltas of every hand the action finished.
    pub hands: Vec<[i64; NUM_PLAYERS]>,
    pub episode_over: bool,
}

/// A two-player zero-sum game played as a sequence of episodes.
pub trait Environment {
    type Obs: Clone;

    fn num_actions(&self) -> usize;
    fn input_len(&self) -> usize;
    fn write_input(&self, obs: &Self::Obs, out: &mut [f32]);
    /// Chips per hand that reward normalization divides by.
    fn reward_scale(&self) -> f64;
    /// Chip unit of the mbb/h metric.
    fn big_blind(&self) -> f64;

    fn reset(&mut self, seed: u64) -> Result<()>;
    /// Player to act, or `None` once the episode is over.
    fn to_act(&self) -> Option<usize>;
    /// Observation and legal-action bitmask of `player`, who must be to act.
    /// Called exactly once per decision.
    fn observe(&mut self, player: usize) -> Result<(Self::Obs, u32)>;
    fn step(&mut self, action: usize) -> Result<StepReport>;
}

pub(crate) fn mask_bits(mask: &[bool]) -> u32 {
    mask.iter().enumerate().fold(0, |acc, (i, &m)| acc | (u32::from(m) << i))
}

pub(crate) fn bits_mask(bits: u32, n: usize) -> Vec<bool> {
    (0..n).map(|i| bits >> i & 1 == 1).collect()
}

/// Hold'em games; an episode is one game.
#[derive(Clone, Debug)]
pub struct HoldemEnv {
    pub config: GameConfig,
    pub mc_samples: usize,
    state: Option<GameState>,
    prev_frames: [CardFrame; NUM_PLAYERS],
}

impl HoldemEnv {
    pub fn new(config: GameConfig, mc_samples: usize) -> Result<Self> {
        config.validate()?;
        if mc_samples == 0 {
            return Err(Error::InvalidConfig("mc_samples must be positive".into()));
        }
        Ok(HoldemEnv {
            config,
            mc_samples,
            state: None,
            prev_frames: [CardFrame::empty(); NUM_PLAYERS],
        })
    }

    pub fn state(&self) -> Option<&GameState> {
        self.state.as_ref()
    }

    fn state_ref(&self) -> Result<&GameState> {
        self.state.as_ref().ok_or_else(|| Error::InvalidInput("no episode in progress".into()))
    }
}

/// Observation of `player` at the current decision of `state`, given the
/// cards it saw at its previous decision. Shared with evaluation players.
pub fn holdem_observation(state: &GameState, player: usize, prev: &CardFrame, mc_samples: usize) -> Result<(Observation, u32)> {
    let view = state.view(player);
    if !view.is_my_turn() {
        return Err(Error::IllegalAction(format!("player {player} is not to act")));
    }
    let scalars = build_scalars(&view, mc_samples, decision_seed(&view))?;
    let obs = encode(&view, prev, scalars)?;
    Ok((obs, mask_bits(&view.legal_mask()?)))
}

impl Environment for HoldemEnv {
    type Obs = Observation;

    fn num_actions(&self) -> usize {
        NUM_ACTIONS
    }

    fn input_len(&self) -> usize {
        OBS_LEN
    }

    fn write_input(&self, obs: &Observation, out: &mut [f32]) {
        obs.write_tensor(out);
    }

    fn reward_scale(&self) -> f64 {
        f64::from(self.config.starting_stack)
    }

    fn big_blind(&self) -> f64 {
        f64::from(self.config.big_blind())
    }

    fn reset(&mut self, seed: u64) -> Result<()> {
        self.state = Some(new_game(GameConfig {
            seed,
            ..self.config.clone()
        })?);
        self.prev_frames = [CardFrame::empty(); NUM_PLAYERS];
        Ok(())
    }

    fn to_act(&self) -> Option<usize> {
        let s = self.state.as_ref()?;
        (!s.is_game_over()).then(|| s.to_act())
    }

    fn observe(&mut self, player: usize) -> Result<(Observation, u32)> {
        let state = self.state_ref()?;
        let (obs, mask) = holdem_observation(state, player, &self.prev_frames[player], self.mc_samples)?;
        self.prev_frames[player] = obs.current;
        Ok((obs, mask))
    }

    fn step(&mut self, action: usize) -> Result<StepReport> {
        let state = self
            .state
            .as_mut()
            .ok_or_else(|| Error::InvalidInput("no episode in progress".into()))?;
        let results = state.apply_in_place(ActionKind::from_index(action)?)?;
        Ok(StepReport {
            hands: results.iter().map(|r| r.chip_delta).collect(),
            episode_over: state.is_game_over(),
        })
    }
}

/// Kuhn poker; an episode is one deal. Agent `i` always plays seat `i`.
#[derive(Clone, Debug, Default)]
pub struct KuhnEnv {
    state: Option<KuhnState>,
}

impl KuhnEnv {
    pub fn new() -> Self {
        Self::default()
    }
}

impl Environment for KuhnEnv {
    type Obs = [f32; KUHN_OBS_LEN];

    fn num_actions(&self) -> usize {
        NUM_KUHN_ACTIONS
    }

    fn input_len(&self) -> usize {
        KUHN_OBS_LEN
    }

    fn write_input(&self, obs: &Self::Obs, out: &mut [f32]) {
        out.copy_from_slice(obs);
    }

    fn reward_scale(&self) -> f64 {
        1.0
    }

    fn big_blind(&self) -> f64 {
        1.0
    }

    fn reset(&mut self, seed: u64) -> Result<()> {
        let deal = DEALS[ChaCha8Rng::seed_from_u64(seed).random_range(0..DEALS.len())];
        self.state = Some(KuhnState::new(deal)?);
        Ok(())
    }

    fn to_act(&self) -> Option<usize> {
        let s = self.state.as_ref()?;
        (!s.history.is_terminal()).then(|| s.to_act())
    }

    fn observe(&mut self, player: usize) -> Result<(Self::Obs, u32)> {
        let s = self.state.as_ref().ok_or(Error::Terminal)?;
        if s.history.is_terminal() || s.to_act() != player {
            return Err(Error::IllegalAction(format!("player {player} is not to act")));
        }
        Ok((kuhn_features(s)?, 0b11))
    }

    fn step(&mut self, action: usize) -> Result<StepReport> {
        let s = self.state.as_ref().ok_or(Error::Terminal)?;
        let (next, payoff) = kuhn_transition(s, KuhnAction::from_index(action)?)?;
        self.state = Some(next);
        Ok(StepReport {
            hands: payoff.map(|p| vec![[i64::from(p[0]), i64::from(p[1])]]).unwrap_or_default(),
            episode_over: payoff.is_some(),
        })
    }
}
