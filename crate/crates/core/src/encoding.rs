//! Network inputs.
//!
//! Hold'em observations are stored compactly (visible cards of the current
//! and previous decision plus the scalar features) and expanded into the
//! 17×17×9 channels-last tensor on demand:
//!
//! | channel | content |
//! |---|---|
//! | 0 | own hole cards |
//! | 1 | board |
//! | 2 | own hole cards at the previous decision |
//! | 3 | board at the previous decision |
//! | 4 | own equity |
//! | 5 | opponent strength |
//! | 6 | pot |
//! | 7 | own stack (rows 0–7), to-call (row 8), opponent stack (rows 9–16) |
//! | 8 | last opponent action (rows 0–7), preflop rank (row 8), street (rows 9–16) |
//!
//! A card of suit `s` and rank `r` lights cell `(2 + 3s, 2 + r)`.

use serde::{Deserialize, Serialize};

use crate::cards::{equity_mc, opponent_strength_mc_with_dead, preflop_rank, Card};
use crate::engine::{PlayerView, Street};
use crate::kuhn::{KuhnState, DECISION_HISTORIES, NUM_CARDS};
use crate::{Error, Result};

pub const OBS_HEIGHT: usize = 17;
pub const OBS_WIDTH: usize = 17;
pub const OBS_CHANNELS: usize = 9;
pub const OBS_LEN: usize = OBS_HEIGHT * OBS_WIDTH * OBS_CHANNELS;

/// Flat Kuhn input: card one-hot followed by decision-history one-hot.
pub const KUHN_OBS_LEN: usize = NUM_CARDS + DECISION_HISTORIES.len();

/// Grid cell `(row, col)` of a card.
pub fn card_cell(card: Card) -> (usize, usize) {
    (2 + 3 * card.suit() as usize, 2 + card.rank() as usize)
}

#[inline]
fn offset(row: usize, col: usize, channel: usize) -> usize {
    (row * OBS_WIDTH + col) * OBS_CHANNELS + channel
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ScalarFeatures {
    pub own_equity: f32,
    pub opponent_strength: f32,
    pub preflop_rank_norm: f32,
    pub pot_norm: f32,
    pub own_stack_norm: f32,
    pub opp_stack_norm: f32,
    pub to_call_norm: f32,
    pub last_opp_action: f32,
    pub street_norm: f32,
}

impl ScalarFeatures {
    pub fn to_array(&self) -> [f32; 9] {
        [
            self.own_equity,
            self.opponent_strength,
            self.preflop_rank_norm,
            self.pot_norm,
            self.own_stack_norm,
            self.opp_stack_norm,
            self.to_call_norm,
            self.last_opp_action,
            self.street_norm,
        ]
    }

    pub fn validate(&self) -> Result<()> {
        if self.to_array().iter().all(|v| (0.0..=1.0).contains(v)) {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("scalar features outside [0, 1]: {self:?}")))
        }
    }
}

/// Cards visible to one player at one decision.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CardFrame {
    hole: Option<[Card; 2]>,
    board: [Option<Card>; 5],
}

impl CardFrame {
    pub fn new(hole: [Card; 2], board: &[Card]) -> Result<Self> {
        if board.len() > 5 {
            return Err(Error::InvalidInput(format!("board of {} cards", board.len())));
        }
        let mut b = [None; 5];
        for (slot, &c) in b.iter_mut().zip(board) {
            *slot = Some(c);
        }
        Ok(CardFrame { hole: Some(hole), board: b })
    }

    /// The all-zero frame used before a player's first decision.
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn hole(&self) -> Option<[Card; 2]> {
        self.hole
    }

    pub fn board(&self) -> impl Iterator<Item = Card> + '_ {
        self.board.iter().flatten().copied()
    }
}

/// A hold'em observation in compact form.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub current: CardFrame,
    pub previous: CardFrame,
    pub scalars: ScalarFeatures,
}

impl Observation {
    /// Writes the 17×17×9 tensor into `out` (which is fully overwritten).
    pub fn write_tensor(&self, out: &mut [f32]) {
        assert_eq!(out.len(), OBS_LEN, "observation buffer length");
        out.fill(0.0);
        let mut put_frame = |frame: &CardFrame, hole_ch: usize, board_ch: usize| {
            for c in frame.hole.iter().flatten() {
                let (r, col) = card_cell(*c);
                out[offset(r, col, hole_ch)] = 1.0;
            }
            for c in frame.board() {
                let (r, col) = card_cell(c);
                out[offset(r, col, board_ch)] = 1.0;
            }
        };
        put_frame(&self.current, 0, 1);
        put_frame(&self.previous, 2, 3);
        let s = &self.scalars;
        for row in 0..OBS_HEIGHT {
            let (ch7, ch8) = match row {
                0..=7 => (s.own_stack_norm, s.last_opp_action),
                8 => (s.to_call_norm, s.preflop_rank_norm),
                _ => (s.opp_stack_norm, s.street_norm),
            };
            for col in 0..OBS_WIDTH {
                let base = offset(row, col, 0);
                out[base + 4] = s.own_equity;
                out[base + 5] = s.opponent_strength;
                out[base + 6] = s.pot_norm;
                out[base + 7] = ch7;
                out[base + 8] = ch8;
            }
        }
    }

    pub fn tensor(&self) -> Vec<f32> {
        let mut out = vec![0.0; OBS_LEN];
        self.write_tensor(&mut out);
        out
    }
}

/// Deterministic Monte-Carlo seed for one decision.
pub fn decision_seed(view: &PlayerView<'_>) -> u64 {
    let mut z = view.config().seed
        ^ (u64::from(view.hand_index()) << 32)
        ^ ((view.history().len() as u64) << 8)
        ^ view.player() as u64;
    z = (z ^ (z >> 33)).wrapping_mul(0xff51_afd7_ed55_8ccd);
    z = (z ^ (z >> 33)).wrapping_mul(0xc4ce_b9fe_1a85_ec53);
    z ^ (z >> 33)
}

/// Heuristic features of the viewer's spot.
///
/// Equity always comes from `equity_mc`. Opponent strength needs a board;
/// preflop it is reported as 0.5, the midpoint of the scale. Stacks, pot and
/// the amount to call are divided by the chips in play, `2 × starting_stack`.
pub fn build_scalars(view: &PlayerView<'_>, mc_samples: usize, seed: u64) -> Result<ScalarFeatures> {
    let hole = view.hole();
    let board = view.board();
    let street = view.street();
    if board.len() != street.board_len() {
        return Err(Error::InvalidInput(format!(
            "{} board of {} cards",
            street.name(),
            board.len()
        )));
    }
    let own_equity = equity_mc(&hole, board, mc_samples, seed)?.win_rate;
    let opponent_strength = if street == Street::Preflop {
        0.5
    } else {
        opponent_strength_mc_with_dead(board, &hole, mc_samples, seed ^ 0x5bd1_e995)?.win_rate
    };
    let chips = 2.0 * f64::from(view.config().starting_stack);
    let last = view.last_opponent_action().map_or(0, |a| a.index());
    let scalars = ScalarFeatures {
        own_equity: own_equity as f32,
        opponent_strength: opponent_strength as f32,
        preflop_rank_norm: preflop_rank(&hole)?.normalized() as f32,
        pot_norm: (f64::from(view.pot_total()) / chips) as f32,
        own_stack_norm: (f64::from(view.own_stack()) / chips) as f32,
        opp_stack_norm: (f64::from(view.opp_stack()) / chips) as f32,
        to_call_norm: (f64::from(view.to_call()) / chips) as f32,
        last_opp_action: last as f32 / 4.0,
        street_norm: street.index() as f32 / 3.0,
    };
    scalars.validate()?;
    Ok(scalars)
}

/// Packs the viewer's cards, the previous frame and the scalar features.
pub fn encode(view: &PlayerView<'_>, prev_frame: &CardFrame, scalars: ScalarFeatures) -> Result<Observation> {
    scalars.validate()?;
    Ok(Observation {
        current: CardFrame::new(view.hole(), view.board())?,
        previous: *prev_frame,
        scalars,
    })
}

/// Flat features of the Kuhn player to act.
pub fn kuhn_features(state: &KuhnState) -> Result<[f32; KUHN_OBS_LEN]> {
    let h = state.history.index().ok_or(Error::Terminal)?;
    let mut out = [0.0; KUHN_OBS_LEN];
    out[state.card(state.to_act()) as usize] = 1.0;
    out[NUM_CARDS + h] = 1.0;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cards::parse_cards;
    use crate::engine::{new_game, ActionKind, GameConfig};

    fn channel_sum(t: &[f32], ch: usize) -> f32 {
        t.iter().skip(ch).step_by(OBS_CHANNELS).sum()
    }

    #[test]
    fn aces_cells() {
        let aa = parse_cards("AsAh").unwrap();
        assert_eq!(card_cell(aa[0]), (2, 14));
        assert_eq!(card_cell(aa[1]), (5, 14));
        let obs = Observation {
            current: CardFrame::new([aa[0], aa[1]], &[]).unwrap(),
            previous: CardFrame::empty(),
            scalars: ScalarFeatures::default(),
        };
        let t = obs.tensor();
        assert_eq!(t[offset(2, 14, 0)], 1.0);
        assert_eq!(t[offset(5, 14, 0)], 1.0);
        assert_eq!(channel_sum(&t, 0), 2.0);
    }

    #[test]
    fn first_decision_preflop() {
        let state = new_game(GameConfig::with_seed(3)).unwrap();
        let view = state.view(state.to_act());
        let scalars = build_scalars(&view, 200, decision_seed(&view)).unwrap();
        let t = encode(&view, &CardFrame::empty(), scalars).unwrap().tensor();
        assert_eq!(t.len(), OBS_LEN);
        assert_eq!(channel_sum(&t, 0), 2.0);
        for ch in 1..4 {
            assert_eq!(channel_sum(&t, ch), 0.0);
        }
        assert_eq!(scalars.street_norm, 0.0);
        // Small blind faces the 5-chip difference.
        assert_eq!(scalars.to_call_norm, 5.0 / 200.0);
    }

    #[test]
    fn postflop_board_channel() {
        let mut state = new_game(GameConfig::with_seed(8)).unwrap();
        state.apply_in_place(ActionKind::CheckCall).unwrap();
        state.apply_in_place(ActionKind::CheckCall).unwrap();
        assert_eq!(state.street(), Street::Flop);
        let view = state.view(state.to_act());
        let s = build_scalars(&view, 100, 1).unwrap();
        assert_eq!(s.to_call_norm, 0.0);
        let t = encode(&view, &CardFrame::empty(), s).unwrap().tensor();
        assert_eq!(channel_sum(&t, 1), 3.0);
    }

    #[test]
    fn aces_rank_one() {
        let state = new_game(GameConfig::with_seed(1)).unwrap();
        let view = state.view(0);
        let s = build_scalars(&view, 50, 2).unwrap();
        let expected = preflop_rank(&view.hole()).unwrap().normalized() as f32;
        assert_eq!(s.preflop_rank_norm, expected);
        assert!(s.validate().is_ok());
    }

    #[test]
    fn kuhn_one_hots() {
        let s = KuhnState::new((2, 0)).unwrap();
        assert_eq!(kuhn_features(&s).unwrap(), [0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0]);
    }
}
