//! Heads-up no-limit hold'em with a five-action abstraction.
//!
//! A game is a sequence of hands between two seats that ends when a stack is
//! empty or after `max_hands_per_game` hands. The button posts the small blind
//! and acts first preflop; it alternates every hand. Bets are capped at what
//! the opponent can still match, so no side pot or refund is ever needed
//! except when a short stack posts an incomplete blind.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::cards::{evaluate, new_deck_shuffled, Card, HandClass};
use crate::{Error, Result};

pub const NUM_ACTIONS: usize = 5;
pub const NUM_PLAYERS: usize = 2;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameConfig {
    pub starting_stack: u32,
    pub small_blind: u32,
    pub max_hands_per_game: u32,
    pub seed: u64,
    /// Offer FOLD even when checking is free. Off by default.
    pub allow_free_fold: bool,
}

impl Default for GameConfig {
    fn default() -> Self {
        GameConfig {
            starting_stack: 100,
            small_blind: 5,
            max_hands_per_game: 20,
            seed: 0,
            allow_free_fold: false,
        }
    }
}

impl GameConfig {
    pub fn with_seed(seed: u64) -> Self {
        GameConfig {
            seed,
            ..Self::default()
        }
    }

    pub fn big_blind(&self) -> u32 {
        2 * self.small_blind
    }

    pub fn validate(&self) -> Result<()> {
        if self.small_blind < 1 {
            return Err(Error::InvalidConfig("small blind must be at least 1".into()));
        }
        if self.starting_stack < 2 * self.big_blind() {
            return Err(Error::InvalidConfig(format!(
                "starting stack {} is below two big blinds",
                self.starting_stack
            )));
        }
        if self.max_hands_per_game == 0 {
            return Err(Error::InvalidConfig("max_hands_per_game must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Street {
    Preflop,
    Flop,
    Turn,
    River,
}

impl Street {
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn board_len(self) -> usize {
        [0, 3, 4, 5][self as usize]
    }

    fn next(self) -> Option<Street> {
        match self {
            Street::Preflop => Some(Street::Flop),
            Street::Flop => Some(Street::Turn),
            Street::Turn => Some(Street::River),
            Street::River => None,
        }
    }

    pub fn name(self) -> &'static str {
        ["preflop", "flop", "turn", "river"][self as usize]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ActionKind {
    Fold,
    CheckCall,
    RaiseHalfPot,
    RaisePot,
    AllIn,
}

impl ActionKind {
    pub const ALL: [ActionKind; NUM_ACTIONS] = [
        ActionKind::Fold,
        ActionKind::CheckCall,
        ActionKind::RaiseHalfPot,
        ActionKind::RaisePot,
        ActionKind::AllIn,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Result<Self> {
        Self::ALL
            .get(i)
            .copied()
            .ok_or_else(|| Error::IllegalAction(format!("action index {i}")))
    }

    pub fn is_raise(self) -> bool {
        matches!(self, ActionKind::RaiseHalfPot | ActionKind::RaisePot | ActionKind::AllIn)
    }

    pub fn name(self) -> &'static str {
        match self {
            ActionKind::Fold => "FOLD",
            ActionKind::CheckCall => "CHECK_CALL",
            ActionKind::RaiseHalfPot => "RAISE_HALF_POT",
            ActionKind::RaisePot => "RAISE_POT",
            ActionKind::AllIn => "ALL_IN",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|a| a.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::IllegalAction(format!("unknown action {s:?}")))
    }
}

impl fmt::Display for ActionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// An action with the chips it moves from the actor's stack.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Action {
    pub kind: ActionKind,
    pub chips: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub hand: u32,
    pub street: Street,
    pub player: usize,
    pub action: Action,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HandResult {
    pub hand: u32,
    pub chip_delta: [i64; NUM_PLAYERS],
    pub showdown: bool,
    /// Class of the winning hand at showdown (the shared class on a split).
    pub winning_class: Option<HandClass>,
    /// Both holes, present only when the hand reached showdown.
    pub revealed: Option<[[Card; 2]; NUM_PLAYERS]>,
    pub board: Vec<Card>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StepOutcome {
    pub state: GameState,
    /// Hands finished by the action; see [`GameState::apply_in_place`].
    pub hand_results: Vec<HandResult>,
    pub game_over: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GameState {
    config: GameConfig,
    hand_index: u32,
    button: usize,
    street: Street,
    holes: [[Card; 2]; NUM_PLAYERS],
    runout: [Card; 5],
    stacks: [u32; NUM_PLAYERS],
    bets: [u32; NUM_PLAYERS],
    pot: u32,
    acted: [bool; NUM_PLAYERS],
    min_raise: u32,
    to_act: usize,
    hand_start_stacks: [u32; NUM_PLAYERS],
    history: Vec<HistoryEntry>,
    results: Vec<HandResult>,
    hand_over: bool,
    game_over: bool,
}

fn mix_seed(seed: u64, hand: u32) -> u64 {
    // splitmix64 finalizer
    let mut z = seed ^ u64::from(hand).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Starts a game and deals its first hand.
pub fn new_game(config: GameConfig) -> Result<GameState> {
    GameState::new(config)
}

impl GameState {
    pub fn new(config: GameConfig) -> Result<Self> {
        config.validate()?;
        let stacks = [config.starting_stack; NUM_PLAYERS];
        let mut state = GameState {
            config,
            hand_index: 0,
            button: 0,
            street: Street::Preflop,
            holes: [[Card::from_index(0); 2]; NUM_PLAYERS],
            runout: [Card::from_index(0); 5],
            stacks,
            bets: [0; NUM_PLAYERS],
            pot: 0,
            acted: [false; NUM_PLAYERS],
            min_raise: 0,
            to_act: 0,
            hand_start_stacks: stacks,
            history: Vec::new(),
            results: Vec::new(),
            hand_over: false,
            game_over: false,
        };
        state.start_hand();
        Ok(state)
    }

    fn start_hand(&mut self) {
        let deck = new_deck_shuffled(mix_seed(self.config.seed, self.hand_index));
        self.holes = [[deck[0], deck[1]], [deck[2], deck[3]]];
        self.runout.copy_from_slice(&deck[4..9]);
        self.street = Street::Preflop;
        self.button = (self.hand_index % 2) as usize;
        self.hand_start_stacks = self.stacks;
        self.pot = 0;
        self.bets = [0; NUM_PLAYERS];
        self.acted = [false; NUM_PLAYERS];
        self.hand_over = false;
        let sb = self.button;
        let bb = 1 - sb;
        let post_sb = self.config.small_blind.min(self.stacks[sb]);
        let post_bb = self.config.big_blind().min(self.stacks[bb]);
        self.stacks[sb] -= post_sb;
        self.bets[sb] = post_sb;
        self.stacks[bb] -= post_bb;
        self.bets[bb] = post_bb;
        self.min_raise = self.config.big_blind();
        self.to_act = sb;
        self.settle_turn(sb);
    }

    fn needs_action(&self, p: usize) -> bool {
        let o = 1 - p;
        self.stacks[p] > 0 && (self.bets[p] < self.bets[o] || (!self.acted[p] && self.stacks[o] > 0))
    }

    /// Picks the next actor, closing streets and the hand as required.
    /// `first` is the preferred actor when both could act.
    fn settle_turn(&mut self, first: usize) {
        if self.needs_action(first) {
            self.to_act = first;
            return;
        }
        if self.needs_action(1 - first) {
            self.to_act = 1 - first;
            return;
        }
        // Betting round closed. Return any uncalled excess (short blinds only).
        let (hi, lo) = if self.bets[0] >= self.bets[1] { (0, 1) } else { (1, 0) };
        let excess = self.bets[hi] - self.bets[lo];
        self.bets[hi] -= excess;
        self.stacks[hi] += excess;
        self.pot += self.bets[0] + self.bets[1];
        self.bets = [0; NUM_PLAYERS];
        self.acted = [false; NUM_PLAYERS];
        self.min_raise = self.config.big_blind();
        match self.street.next() {
            Some(next) => {
                self.street = next;
                // Out of position acts first after the flop.
                self.settle_turn(1 - self.button);
            }
            None => self.showdown(),
        }
    }

    fn showdown(&mut self) {
        let classes: [HandClass; 2] = std::array::from_fn(|p| {
            let mut cards = [self.runout[0]; 7];
            cards[..5].copy_from_slice(&self.runout);
            cards[5..].copy_from_slice(&self.holes[p]);
            evaluate(&cards)
        });
        let pot = self.pot;
        let oop = 1 - self.button;
        match classes[0].cmp(&classes[1]) {
            std::cmp::Ordering::Less => self.stacks[0] += pot,
            std::cmp::Ordering::Greater => self.stacks[1] += pot,
            std::cmp::Ordering::Equal => {
                self.stacks[0] += pot / 2;
                self.stacks[1] += pot / 2;
                self.stacks[oop] += pot % 2;
            }
        }
        self.pot = 0;
        let winning = classes[0].min(classes[1]);
        self.finish_hand(true, Some(winning));
    }

    fn finish_hand(&mut self, showdown: bool, winning_class: Option<HandClass>) {
        let chip_delta: [i64; 2] = std::array::from_fn(|p| {
            i64::from(self.stacks[p]) - i64::from(self.hand_start_stacks[p])
        });
        self.results.push(HandResult {
            hand: self.hand_index,
            chip_delta,
            showdown,
            winning_class,
            revealed: showdown.then_some(self.holes),
            board: self.runout[..self.street.board_len()].to_vec(),
        });
        self.hand_over = true;
        let busted = self.stacks.contains(&0);
        if busted || self.hand_index + 1 >= self.config.max_hands_per_game {
            self.game_over = true;
        }
    }

    pub fn config(&self) -> &GameConfig {
        &self.config
    }

    pub fn hand_index(&self) -> u32 {
        self.hand_index
    }

    pub fn button(&self) -> usize {
        self.button
    }

    pub fn street(&self) -> Street {
        self.street
    }

    pub fn board(&self) -> &[Card] {
        &self.runout[..self.street.board_len()]
    }

    pub fn stacks(&self) -> [u32; NUM_PLAYERS] {
        self.stacks
    }

    pub fn bets(&self) -> [u32; NUM_PLAYERS] {
        self.bets
    }

    /// Chips collected from closed streets plus the current street's bets.
    pub fn pot_total(&self) -> u32 {
        self.pot + self.bets[0] + self.bets[1]
    }

    pub fn to_act(&self) -> usize {
        self.to_act
    }

    pub fn history(&self) -> &[HistoryEntry] {
        &self.history
    }

    pub fn results(&self) -> &[HandResult] {
        &self.results
    }

    pub fn is_game_over(&self) -> bool {
        self.game_over
    }

    pub fn hole(&self, player: usize) -> [Card; 2] {
        self.holes[player]
    }

    /// What `player` is allowed to see.
    pub fn view(&self, player: usize) -> PlayerView<'_> {
        PlayerView { state: self, player }
    }

    pub fn to_call(&self, player: usize) -> u32 {
        self.bets[1 - player].saturating_sub(self.bets[player])
    }

    /// Chips in play; always equals twice the starting stack.
    pub fn total_chips(&self) -> u32 {
        self.stacks[0] + self.stacks[1] + self.pot_total()
    }

    pub fn legal_actions(&self) -> Result<Vec<Action>> {
        if self.game_over {
            return Err(Error::Terminal);
        }
        let p = self.to_act;
        let o = 1 - p;
        let to_call = self.to_call(p);
        let mut out = Vec::with_capacity(NUM_ACTIONS);
        if to_call > 0 || self.config.allow_free_fold {
            out.push(Action {
                kind: ActionKind::Fold,
                chips: 0,
            });
        }
        out.push(Action {
            kind: ActionKind::CheckCall,
            chips: to_call.min(self.stacks[p]),
        });
        if self.stacks[p] > to_call && self.stacks[o] > 0 {
            let max_total = (self.bets[p] + self.stacks[p]).min(self.bets[o] + self.stacks[o]);
            let min_total = (self.bets[o] + self.min_raise).min(max_total);
            let pot_after_call = self.pot_total() + to_call;
            let sized = |total: u32| total.clamp(min_total, max_total) - self.bets[p];
            out.push(Action {
                kind: ActionKind::RaiseHalfPot,
                chips: sized(self.bets[o] + pot_after_call / 2),
            });
            out.push(Action {
                kind: ActionKind::RaisePot,
                chips: sized(self.bets[o] + pot_after_call),
            });
            out.push(Action {
                kind: ActionKind::AllIn,
                chips: max_total - self.bets[p],
            });
        }
        Ok(out)
    }

    /// Legal-action mask indexed by [`ActionKind::index`].
    pub fn legal_mask(&self) -> Result<[bool; NUM_ACTIONS]> {
        let mut mask = [false; NUM_ACTIONS];
        for a in self.legal_actions()? {
            mask[a.kind.index()] = true;
        }
        Ok(mask)
    }

    pub fn resolve(&self, kind: ActionKind) -> Result<Action> {
        self.legal_actions()?
            .into_iter()
            .find(|a| a.kind == kind)
            .ok_or_else(|| Error::IllegalAction(format!("{kind} is not legal here")))
    }

    /// Applies `kind` for the player to act, returning the successor state.
    pub fn apply_action(&self, kind: ActionKind) -> Result<StepOutcome> {
        let mut next = self.clone();
        let hand_results = next.apply_in_place(kind)?;
        let game_over = next.game_over;
        Ok(StepOutcome {
            state: next,
            hand_results,
            game_over,
        })
    }

    /// In-place variant of [`GameState::apply_action`]; on error the state
    /// is untouched. After a hand ends the next one is dealt immediately
    /// unless the game is over.
    ///
    /// Returns the hands the action finished: usually none or one, more when
    /// a stack too short for its blind is all-in before anyone can act and
    /// the following hand is dealt out automatically.
    pub fn apply_in_place(&mut self, kind: ActionKind) -> Result<Vec<HandResult>> {
        let action = self.resolve(kind)?;
        let p = self.to_act;
        let o = 1 - p;
        self.history.push(HistoryEntry {
            hand: self.hand_index,
            street: self.street,
            player: p,
            action,
        });
        self.acted[p] = true;
        match kind {
            ActionKind::Fold => {
                self.pot += self.bets[0] + self.bets[1];
                self.bets = [0; NUM_PLAYERS];
                self.stacks[o] += self.pot;
                self.pot = 0;
                self.finish_hand(false, None);
            }
            _ => {
                let prev_top = self.bets[o];
                self.stacks[p] -= action.chips;
                self.bets[p] += action.chips;
                if self.bets[p] > prev_top {
                    self.min_raise = self.min_raise.max(self.bets[p] - prev_top);
                }
                self.settle_turn(o);
            }
        }
        let mut finished = Vec::new();
        while self.hand_over {
            finished.push(self.results.last().cloned().expect("finished hand has a result"));
            if self.game_over {
                break;
            }
            self.hand_index += 1;
            self.start_hand();
        }
        Ok(finished)
    }

    /// One line per action, `hand_idx,street,player,action,chips`, and one
    /// `hand_idx,result,delta0,delta1,showdown|fold` line per finished hand.
    pub fn hand_history_lines(&self) -> Vec<String> {
        let mut lines = Vec::new();
        let mut results = self.results.iter().peekable();
        for e in &self.history {
            while let Some(r) = results.next_if(|r| r.hand < e.hand) {
                lines.push(result_line(r));
            }
            lines.push(format!(
                "{},{},{},{},{}",
                e.hand,
                e.street.name(),
                e.player,
                e.action.kind,
                e.action.chips
            ));
        }
        lines.extend(results.map(result_line));
        lines
    }
}

fn result_line(r: &HandResult) -> String {
    format!(
        "{},result,{},{},{}",
        r.hand,
        r.chip_delta[0],
        r.chip_delta[1],
        if r.showdown { "showdown" } else { "fold" }
    )
}

/// The part of a [`GameState`] visible to one player.
#[derive(Clone, Copy)]
pub struct PlayerView<'a> {
    state: &'a GameState,
    player: usize,
}

impl<'a> PlayerView<'a> {
    pub fn player(&self) -> usize {
        self.player
    }

    pub fn hole(&self) -> [Card; 2] {
        self.state.holes[self.player]
    }

    pub fn board(&self) -> &'a [Card] {
        self.state.board()
    }

    pub fn street(&self) -> Street {
        self.state.street
    }

    pub fn pot_total(&self) -> u32 {
        self.state.pot_total()
    }

    pub fn own_stack(&self) -> u32 {
        self.state.stacks[self.player]
    }

    pub fn opp_stack(&self) -> u32 {
        self.state.stacks[1 - self.player]
    }

    pub fn to_call(&self) -> u32 {
        self.state.to_call(self.player)
    }

    pub fn config(&self) -> &'a GameConfig {
        &self.state.config
    }

    pub fn hand_index(&self) -> u32 {
        self.state.hand_index
    }

    pub fn is_button(&self) -> bool {
        self.state.button == self.player
    }

    pub fn history(&self) -> &'a [HistoryEntry] {
        &self.state.history
    }

    /// Most recent opponent action in the game, if any.
    pub fn last_opponent_action(&self) -> Option<ActionKind> {
        self.state
            .history
            .iter()
            .rev()
            .find(|e| e.player != self.player)
            .map(|e| e.action.kind)
    }

    pub fn is_my_turn(&self) -> bool {
        !self.state.game_over && self.state.to_act == self.player
    }

    pub fn legal_actions(&self) -> Result<Vec<Action>> {
        self.state.legal_actions()
    }

    pub fn legal_mask(&self) -> Result<[bool; NUM_ACTIONS]> {
        self.state.legal_mask()
    }
}

/// `1000 × total_chip_delta / (big_blind × hands)`
pub fn mbb_per_hand(total_chip_delta: i64, hands: u64, big_blind: u32) -> Result<f64> {
    if hands == 0 {
        return Err(Error::InvalidInput("mbb/h over zero hands".into()));
    }
    Ok(1000.0 * total_chip_delta as f64 / (f64::from(big_blind) * hands as f64))
}

/// Per-hand results of one player across a match.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatchScore {
    pub hands_played: u64,
    pub chip_deltas: Vec<i64>,
    pub mbb_per_hand: f64,
    pub average_final_stack: f64,
}

impl MatchScore {
    pub fn new(chip_deltas: Vec<i64>, final_stacks: &[u32], big_blind: u32) -> Result<Self> {
        let hands = chip_deltas.len() as u64;
        let mbb = mbb_per_hand(chip_deltas.iter().sum(), hands, big_blind)?;
        let average_final_stack = if final_stacks.is_empty() {
            0.0
        } else {
            final_stacks.iter().map(|&s| f64::from(s)).sum::<f64>() / final_stacks.len() as f64
        };
        Ok(MatchScore {
            hands_played: hands,
            chip_deltas,
            mbb_per_hand: mbb,
            average_final_stack,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cards::rank7;

    fn kinds(s: &GameState) -> Vec<ActionKind> {
        s.legal_actions().unwrap().iter().map(|a| a.kind).collect()
    }

    #[test]
    fn blinds_posted() {
        let s = new_game(GameConfig::default()).unwrap();
        assert_eq!(s.stacks(), [95, 90]);
        assert_eq!(s.pot_total(), 15);
        assert_eq!(s.street(), Street::Preflop);
        assert_eq!(s.to_act(), 0);
        assert_eq!(s.total_chips(), 200);
    }

    #[test]
    fn invalid_configs() {
        let bad = [
            GameConfig { small_blind: 0, ..Default::default() },
            GameConfig { starting_stack: 15, ..Default::default() },
            GameConfig { max_hands_per_game: 0, ..Default::default() },
        ];
        for c in bad {
            assert!(matches!(new_game(c), Err(Error::InvalidConfig(_))));
        }
    }

    #[test]
    fn same_seed_same_deal() {
        let a = new_game(GameConfig::with_seed(9)).unwrap();
        let b = new_game(GameConfig::with_seed(9)).unwrap();
        assert_eq!(a, b);
        let c = new_game(GameConfig::with_seed(10)).unwrap();
        assert_ne!(a.hole(0), c.hole(0));
    }

    #[test]
    fn button_alternates() {
        let s = new_game(GameConfig::default()).unwrap();
        let out = s.apply_action(ActionKind::Fold).unwrap();
        assert_eq!(out.state.hand_index(), 1);
        assert_eq!(out.state.button(), 1);
        assert_eq!(out.state.to_act(), 1);
        assert_eq!(out.state.stacks(), [85, 100]);
    }

    #[test]
    fn small_blind_fold() {
        let s = new_game(GameConfig::default()).unwrap();
        let out = s.apply_action(ActionKind::Fold).unwrap();
        let r = out.hand_results[0].clone();
        assert_eq!(r.chip_delta, [-5, 5]);
        assert!(!r.showdown);
        assert!(r.revealed.is_none());
    }

    #[test]
    fn legal_sets() {
        let s = new_game(GameConfig::default()).unwrap();
        assert_eq!(
            kinds(&s),
            vec![
                ActionKind::Fold,
                ActionKind::CheckCall,
                ActionKind::RaiseHalfPot,
                ActionKind::RaisePot,
                ActionKind::AllIn
            ]
        );
        // Limp; the big blind faces no bet.
        let s = s.apply_action(ActionKind::CheckCall).unwrap().state;
        assert_eq!(s.to_act(), 1);
        assert_eq!(
            kinds(&s),
            vec![ActionKind::CheckCall, ActionKind::RaiseHalfPot, ActionKind::RaisePot, ActionKind::AllIn]
        );
        // Pot 20 facing nothing: half pot is 10 chips.
        let half = s.resolve(ActionKind::RaiseHalfPot).unwrap();
        assert_eq!(half.chips, 10);
        assert_eq!(s.resolve(ActionKind::RaisePot).unwrap().chips, 20);
        assert_eq!(s.resolve(ActionKind::AllIn).unwrap().chips, 90);
    }

    #[test]
    fn facing_all_in_only_fold_or_call() {
        let s = new_game(GameConfig::default()).unwrap();
        let s = s.apply_action(ActionKind::AllIn).unwrap().state;
        // Small blind shoves 95; big blind has 90 behind and owes exactly 90.
        assert_eq!(s.to_call(1), 90);
        assert_eq!(s.stacks()[1], 90);
        assert_eq!(kinds(&s), vec![ActionKind::Fold, ActionKind::CheckCall]);
    }

    #[test]
    fn raise_capped_by_effective_stack() {
        let s = new_game(GameConfig::default()).unwrap();
        // Small blind can only put the big blind all in: 90 + 10 total.
        assert_eq!(s.resolve(ActionKind::AllIn).unwrap().chips, 95);
        let s = s.apply_action(ActionKind::RaisePot).unwrap().state;
        // pot 15 + call 5 = 20 → raise to 30, 25 chips in.
        assert_eq!(s.bets(), [30, 10]);
        // Min raise is now 20 more.
        let min_half = s.resolve(ActionKind::RaiseHalfPot).unwrap();
        assert!(min_half.chips >= 20 + 20);
    }

    #[test]
    fn all_in_runs_out_to_showdown() {
        let s = new_game(GameConfig::with_seed(3)).unwrap();
        let s = s.apply_action(ActionKind::AllIn).unwrap().state;
        let out = s.apply_action(ActionKind::CheckCall).unwrap();
        let r = out.hand_results[0].clone();
        assert!(r.showdown);
        assert_eq!(r.board.len(), 5);
        let [h0, h1] = r.revealed.unwrap();
        let c0 = rank7(&[&r.board[..], &h0[..]].concat()).unwrap();
        let c1 = rank7(&[&r.board[..], &h1[..]].concat()).unwrap();
        let expected = match c0.cmp(&c1) {
            std::cmp::Ordering::Less => [100, -100],
            std::cmp::Ordering::Greater => [-100, 100],
            std::cmp::Ordering::Equal => [0, 0],
        };
        assert_eq!(r.chip_delta, expected);
        assert_eq!(r.winning_class, Some(c0.min(c1)));
    }

    #[test]
    fn check_down_to_showdown() {
        let mut s = new_game(GameConfig::with_seed(11)).unwrap();
        let mut result = Vec::new();
        for _ in 0..8 {
            result = s.apply_in_place(ActionKind::CheckCall).unwrap();
            if !result.is_empty() {
                break;
            }
        }
        let r = &result[0];
        assert!(r.showdown);
        assert!(r.chip_delta[0].abs() == 10 || r.chip_delta == [0, 0]);
        assert_eq!(r.chip_delta[0] + r.chip_delta[1], 0);
    }

    #[test]
    fn illegal_action_leaves_state() {
        let s = new_game(GameConfig::default()).unwrap();
        let s = s.apply_action(ActionKind::CheckCall).unwrap().state;
        let before = s.clone();
        assert!(matches!(s.apply_action(ActionKind::Fold), Err(Error::IllegalAction(_))));
        let mut m = s.clone();
        assert!(m.apply_in_place(ActionKind::Fold).is_err());
        assert_eq!(m, before);
    }

    #[test]
    fn game_ends_at_cap_or_bust() {
        let cfg = GameConfig {
            max_hands_per_game: 3,
            ..Default::default()
        };
        let mut s = new_game(cfg).unwrap();
        let mut hands = 0;
        while !s.is_game_over() {
            hands += s.apply_in_place(ActionKind::Fold).unwrap().len();
        }
        assert_eq!(hands, 3);
        assert!(s.legal_actions().is_err());
        assert_eq!(s.stacks().iter().sum::<u32>(), 200);
    }

    #[test]
    fn short_big_blind_refund() {
        // Player 1 ends up with 3 chips and posts an incomplete big blind.
        let cfg = GameConfig {
            starting_stack: 20,
            small_blind: 5,
            ..Default::default()
        };
        let mut s = new_game(cfg).unwrap();
        let mut guard = 0;
        let mut reported = 0;
        while !s.is_game_over() && guard < 200 {
            let kind = if s.to_act() == 0 { ActionKind::AllIn } else { ActionKind::CheckCall };
            let k = if s.legal_mask().unwrap()[kind.index()] { kind } else { ActionKind::CheckCall };
            reported += s.apply_in_place(k).unwrap().len();
            assert_eq!(s.total_chips(), 40);
            guard += 1;
        }
        assert!(s.is_game_over());
        assert_eq!(reported, s.results().len());
    }

    #[test]
    fn mbb_examples() {
        assert_eq!(mbb_per_hand(10, 1, 10).unwrap(), 1000.0);
        assert_eq!(mbb_per_hand(5, 1, 10).unwrap(), 500.0);
        assert_eq!(mbb_per_hand(-15, 2, 10).unwrap(), -750.0);
        assert!(mbb_per_hand(1, 0, 10).is_err());
    }

    #[test]
    fn history_export() {
        let s = new_game(GameConfig::default()).unwrap();
        let s = s.apply_action(ActionKind::CheckCall).unwrap().state;
        let s = s.apply_action(ActionKind::RaisePot).unwrap().state;
        let s = s.apply_action(ActionKind::Fold).unwrap().state;
        let lines = s.hand_history_lines();
        assert_eq!(lines[0], "0,preflop,0,CHECK_CALL,5");
        assert_eq!(lines[1], "0,preflop,1,RAISE_POT,20");
        assert_eq!(lines[2], "0,preflop,0,FOLD,0");
        assert_eq!(lines[3], "0,result,-10,10,fold");
    }
}
