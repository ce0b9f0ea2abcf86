//! Self-play learning for two-player zero-sum imperfect-information games.
//!
//! The crate bundles everything needed to train and evaluate agents that act
//! from a mixture of an average policy, an ε-greedy best response and a
//! simplex-projected gradient-play response:
//!
//! * [`cards`]: card primitives, the 7462-class hand evaluator, preflop ranks
//!   and equity estimators.
//! * [`engine`]: heads-up no-limit hold'em with a five-action abstraction.
//! * [`kuhn`]: Kuhn poker with an exact best-response oracle.
//! * [`encoding`]: the 17×17×9 observation tensor.
//! * [`neural`]: a small convolutional/dense network stack with manual
//!   backpropagation and checkpoint files.
//! * [`memory`]: circular and reservoir replay stores.
//! * [`strategy`]: the policy-mode mixture and its three response rules.
//! * [`trainer`]: the self-play training loop.
//! * [`arena`]: baseline players and match evaluation.

pub mod arena;
pub mod cards;
pub mod encoding;
pub mod engine;
mod error;
pub mod kuhn;
pub mod memory;
pub mod neural;
pub mod strategy;
pub mod trainer;

pub use cards::{Card, EquityEstimate, HandClass, PreflopRank};
pub use engine::{Action, ActionKind, GameConfig, GameState, HandResult, Street};
pub use error::{Error, Result};
pub use neural::{Network, NetworkSpec};
pub use strategy::{ActionDistribution, MixtureConfig, PolicyMode};
