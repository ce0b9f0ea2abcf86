use std::fmt;
use std::str::FromStr;

use crate::engine::{GameConfig, NUM_ACTIONS};
use crate::encoding::KUHN_OBS_LEN;
use crate::kuhn::NUM_KUHN_ACTIONS;
use crate::memory::{DEFAULT_MIN_REPLAY, DEFAULT_RL_CAPACITY, DEFAULT_SL_CAPACITY};
use crate::neural::NetworkSpec;
use crate::strategy::{MixtureConfig, QExtMode};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GameKind {
    Holdem,
    Kuhn,
}

impl GameKind {
    pub fn name(self) -> &'static str {
        match self {
            GameKind::Holdem => "holdem",
            GameKind::Kuhn => "kuhn",
        }
    }
}

impl FromStr for GameKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "holdem" => Ok(GameKind::Holdem),
            "kuhn" => Ok(GameKind::Kuhn),
            _ => Err(Error::InvalidConfig(format!("unknown game {s:?}"))),
        }
    }
}

/// Everything a training run depends on.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainerConfig {
    pub game: GameKind,
    pub episodes: u64,
    pub seed: u64,
    pub gamma: f64,
    pub batch_size: usize,
    pub update_every: u64,
    pub target_sync_every: u64,
    pub rl_capacity: usize,
    pub sl_capacity: usize,
    pub min_replay: usize,
    pub lr_q: f64,
    pub lr_pi: f64,
    pub mixture: MixtureConfig,
    /// Games per metrics row and per Nash-gap window.
    pub metrics_every: u64,
    /// Episodes between checkpoints; 0 writes only the final one.
    pub checkpoint_every: u64,
    /// Wall-clock budget in seconds; the run stops after the episode that
    /// crosses it. 0 means no limit.
    pub max_seconds: u64,
    pub q_network: NetworkSpec,
    pub pi_network: NetworkSpec,
    pub mc_samples: usize,
    pub game_config: GameConfig,
}

impl TrainerConfig {
    pub fn holdem() -> Self {
        TrainerConfig {
            game: GameKind::Holdem,
            episodes: 10_000,
            seed: 0,
            gamma: 1.0,
            batch_size: 256,
            update_every: 64,
            target_sync_every: 1000,
            rl_capacity: DEFAULT_RL_CAPACITY,
            sl_capacity: DEFAULT_SL_CAPACITY,
            min_replay: DEFAULT_MIN_REPLAY,
            lr_q: 1e-4,
            lr_pi: 1e-3,
            mixture: MixtureConfig::default(),
            metrics_every: 500,
            checkpoint_every: 0,
            max_seconds: 0,
            q_network: NetworkSpec::holdem_default(NUM_ACTIONS),
            pi_network: NetworkSpec::holdem_default(NUM_ACTIONS),
            mc_samples: crate::cards::DEFAULT_MC_SAMPLES,
            game_config: GameConfig::default(),
        }
    }

    /// Settings that converge on Kuhn poker within a desk-scale budget:
    /// small dense networks updated every step from a short replay memory.
    pub fn kuhn() -> Self {
        TrainerConfig {
            game: GameKind::Kuhn,
            episodes: 200_000,
            batch_size: 128,
            update_every: 1,
            target_sync_every: 300,
            rl_capacity: 10_000,
            sl_capacity: 1_000_000,
            min_replay: 1_000,
            lr_q: 1e-3,
            lr_pi: 5e-3,
            mixture: MixtureConfig {
                eps_start: 0.06,
                eps_end: 0.0,
                eps_decay_steps: 200_000,
                ..MixtureConfig::default()
            },
            q_network: NetworkSpec::mlp(KUHN_OBS_LEN, &[64], NUM_KUHN_ACTIONS),
            pi_network: NetworkSpec::mlp(KUHN_OBS_LEN, &[64], NUM_KUHN_ACTIONS),
            ..Self::holdem()
        }
    }

    pub fn default_for(game: GameKind) -> Self {
        match game {
            GameKind::Holdem => Self::holdem(),
            GameKind::Kuhn => Self::kuhn(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.mixture.validate()?;
        let positive = [
            ("batch_size", self.batch_size as u64),
            ("update_every", self.update_every),
            ("target_sync_every", self.target_sync_every),
            ("rl_capacity", self.rl_capacity as u64),
            ("sl_capacity", self.sl_capacity as u64),
            ("metrics_every", self.metrics_every),
            ("mc_samples", self.mc_samples as u64),
        ];
        for (name, v) in positive {
            if v == 0 {
                return Err(Error::InvalidConfig(format!("{name} must be positive")));
            }
        }
        if self.batch_size > self.rl_capacity {
            return Err(Error::InvalidConfig("batch_size exceeds rl_capacity".into()));
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(Error::InvalidConfig(format!("gamma {} outside [0, 1]", self.gamma)));
        }
        for (name, lr) in [("lr_q", self.lr_q), ("lr_pi", self.lr_pi)] {
            if !(lr > 0.0 && lr.is_finite()) {
                return Err(Error::InvalidConfig(format!("{name} must be positive")));
            }
        }
        let (inputs, outputs) = match self.game {
            GameKind::Holdem => (crate::encoding::OBS_LEN, NUM_ACTIONS),
            GameKind::Kuhn => (KUHN_OBS_LEN, NUM_KUHN_ACTIONS),
        };
        for (name, spec) in [("q_network", &self.q_network), ("pi_network", &self.pi_network)] {
            spec.shapes()?;
            if spec.input_len() != inputs || spec.outputs != outputs {
                return Err(Error::InvalidConfig(format!(
                    "{name} {spec} does not map {inputs} inputs to {outputs} actions"
                )));
            }
        }
        self.game_config.validate()
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: FromStr>(key: &str, v: &str) -> Result<T> {
            v.parse()
                .map_err(|_| Error::InvalidConfig(format!("{key} = {v:?} is not a valid number")))
        }
        let flag = |v: &str| match v {
            "true" => Ok(true),
            "false" => Ok(false),
            _ => Err(Error::InvalidConfig(format!("{key} = {v:?} is not a boolean"))),
        };
        match key {
            "game" => self.game = value.parse()?,
            "episodes" => self.episodes = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            "gamma" => self.gamma = num(key, value)?,
            "batch_size" => self.batch_size = num(key, value)?,
            "update_every" => self.update_every = num(key, value)?,
            "target_sync_every" => self.target_sync_every = num(key, value)?,
            "rl_capacity" => self.rl_capacity = num(key, value)?,
            "sl_capacity" => self.sl_capacity = num(key, value)?,
            "min_replay" => self.min_replay = num(key, value)?,
            "lr_q" => self.lr_q = num(key, value)?,
            "lr_pi" => self.lr_pi = num(key, value)?,
            "eta" => self.mixture.eta = num(key, value)?,
            "rho" => self.mixture.rho = num(key, value)?,
            "eps_start" => self.mixture.eps_start = num(key, value)?,
            "eps_end" => self.mixture.eps_end = num(key, value)?,
            "eps_decay_steps" => self.mixture.eps_decay_steps = num(key, value)?,
            "q_ext" => self.mixture.q_ext = QExtMode::parse(value)?,
            "metrics_every" => self.metrics_every = num(key, value)?,
            "checkpoint_every" => self.checkpoint_every = num(key, value)?,
            "max_seconds" => self.max_seconds = num(key, value)?,
            "q_network" => self.q_network = value.parse()?,
            "pi_network" => self.pi_network = value.parse()?,
            "mc_samples" => self.mc_samples = num(key, value)?,
            "starting_stack" => self.game_config.starting_stack = num(key, value)?,
            "small_blind" => self.game_config.small_blind = num(key, value)?,
            "max_hands_per_game" => self.game_config.max_hands_per_game = num(key, value)?,
            "allow_free_fold" => self.game_config.allow_free_fold = flag(value)?,
            _ => return Err(Error::InvalidConfig(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    /// `(key, value)` pairs in the order [`TrainerConfig::parse`] accepts.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        let m = &self.mixture;
        let g = &self.game_config;
        vec![
            ("game", self.game.name().to_string()),
            ("episodes", self.episodes.to_string()),
            ("seed", self.seed.to_string()),
            ("gamma", self.gamma.to_string()),
            ("batch_size", self.batch_size.to_string()),
            ("update_every", self.update_every.to_string()),
            ("target_sync_every", self.target_sync_every.to_string()),
            ("rl_capacity", self.rl_capacity.to_string()),
            ("sl_capacity", self.sl_capacity.to_string()),
            ("min_replay", self.min_replay.to_string()),
            ("lr_q", self.lr_q.to_string()),
            ("lr_pi", self.lr_pi.to_string()),
            ("eta", m.eta.to_string()),
            ("rho", m.rho.to_string()),
            ("eps_start", m.eps_start.to_string()),
            ("eps_end", m.eps_end.to_string()),
            ("eps_decay_steps", m.eps_decay_steps.to_string()),
            ("q_ext", m.q_ext.name().to_string()),
            ("metrics_every", self.metrics_every.to_string()),
            ("checkpoint_every", self.checkpoint_every.to_string()),
            ("max_seconds", self.max_seconds.to_string()),
            ("q_network", self.q_network.to_string()),
            ("pi_network", self.pi_network.to_string()),
            ("mc_samples", self.mc_samples.to_string()),
            ("starting_stack", g.starting_stack.to_string()),
            ("small_blind", g.small_blind.to_string()),
            ("max_hands_per_game", g.max_hands_per_game.to_string()),
            ("allow_free_fold", g.allow_free_fold.to_string()),
        ]
    }

    /// Parses `key = value` lines; `#` starts a comment. Keys not given
    /// keep the defaults of the configured game.
    pub fn parse(text: &str) -> Result<Self> {
        let mut pairs = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::InvalidConfig(format!("line {}: expected key = value", n + 1)))?;
            pairs.push((k.trim().to_string(), v.trim().to_string()));
        }
        Self::from_pairs(pairs.iter().map(|(k, v)| (k.as_str(), v.as_str())))
    }

    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, &'a str)> + Clone) -> Result<Self> {
        let game = match pairs.clone().into_iter().filter(|(k, _)| *k == "game").last() {
            Some((_, v)) => v.parse()?,
            None => GameKind::Holdem,
        };
        let mut config = Self::default_for(game);
        let mut seen = std::collections::HashSet::new();
        for (k, v) in pairs {
            if !seen.insert(k) {
                return Err(Error::InvalidConfig(format!("duplicate key {k:?}")));
            }
            config.set(k, v)?;
        }
        config.validate()?;
        Ok(config)
    }
}

impl fmt::Display for TrainerConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in self.entries() {
            writeln!(f, "{k} = {v}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_round_trip() {
        for c in [TrainerConfig::holdem(), TrainerConfig::kuhn()] {
            c.validate().unwrap();
            assert_eq!(TrainerConfig::parse(&c.to_string()).unwrap(), c);
        }
    }

    #[test]
    fn game_defaults_and_overrides() {
        let c = TrainerConfig::parse("# comment\ngame = kuhn\nepisodes = 10\n").unwrap();
        assert_eq!(c.game, GameKind::Kuhn);
        assert_eq!(c.episodes, 10);
        assert_eq!(c.q_network.input_len(), KUHN_OBS_LEN);
    }

    #[test]
    fn rejects_unknown_and_invalid() {
        assert!(TrainerConfig::parse("bogus = 1").is_err());
        assert!(TrainerConfig::parse("seed = x").is_err());
        assert!(TrainerConfig::parse("seed").is_err());
        assert!(TrainerConfig::parse("rho = 0.5").is_err());
        assert!(TrainerConfig::parse("seed = 1\nseed = 2").is_err());
        assert!(TrainerConfig::parse("game = kuhn\nq_network = in17x17x9 dense4 out5").is_err());
    }
}
