//! Kuhn poker and its exact best-response oracle.
//!
//! Three cards (J, Q, K), one-chip antes and a single one-chip bet. Player 0
//! acts first. Each decision has two actions: pass (check or fold) and bet
//! (bet or call). A behavioral policy is a table over the 12 information sets.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const NUM_CARDS: usize = 3;
pub const NUM_INFOSETS: usize = 12;
pub const NUM_KUHN_ACTIONS: usize = 2;
/// Non-terminal histories, indexed as in [`KuhnHistory::index`].
pub const DECISION_HISTORIES: [&str; 4] = ["", "p", "b", "pb"];
pub const TERMINAL_HISTORIES: [&str; 5] = ["pp", "pbp", "pbb", "bp", "bb"];
/// The six ordered deals of two distinct cards.
pub const DEALS: [(u8, u8); 6] = [(0, 1), (0, 2), (1, 0), (1, 2), (2, 0), (2, 1)];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum KuhnAction {
    Pass,
    Bet,
}

impl KuhnAction {
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Result<Self> {
        match i {
            0 => Ok(KuhnAction::Pass),
            1 => Ok(KuhnAction::Bet),
            _ => Err(Error::IllegalAction(format!("kuhn action {i}"))),
        }
    }

    fn symbol(self) -> char {
        match self {
            KuhnAction::Pass => 'p',
            KuhnAction::Bet => 'b',
        }
    }
}

/// Betting history as a short string over `p` and `b`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct KuhnHistory {
    actions: [Option<KuhnAction>; 3],
    len: u8,
}

impl KuhnHistory {
    pub fn parse(s: &str) -> Result<Self> {
        let mut h = KuhnHistory::default();
        for c in s.chars() {
            let a = match c {
                'p' => KuhnAction::Pass,
                'b' => KuhnAction::Bet,
                _ => return Err(Error::InvalidInput(format!("kuhn history {s:?}"))),
            };
            if h.is_terminal() {
                return Err(Error::InvalidInput(format!("kuhn history {s:?} runs past the end")));
            }
            h = h.push(a);
        }
        Ok(h)
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    fn push(mut self, a: KuhnAction) -> Self {
        self.actions[self.len as usize] = Some(a);
        self.len += 1;
        self
    }

    fn as_string(&self) -> String {
        self.actions[..self.len()]
            .iter()
            .map(|a| a.unwrap().symbol())
            .collect()
    }

    pub fn is_terminal(&self) -> bool {
        TERMINAL_HISTORIES.contains(&self.as_string().as_str())
    }

    /// Index into [`DECISION_HISTORIES`]; `None` when terminal.
    pub fn index(&self) -> Option<usize> {
        let s = self.as_string();
        DECISION_HISTORIES.iter().position(|&h| h == s)
    }

    /// Player to act at a non-terminal history.
    pub fn player(&self) -> usize {
        self.len() % 2
    }

    /// Chips in the middle: two antes plus any bets.
    pub fn pot(&self) -> u32 {
        // every bet or call adds one chip
        2 + self.actions[..self.len()]
            .iter()
            .filter(|a| **a == Some(KuhnAction::Bet))
            .count() as u32
    }
}

impl fmt::Display for KuhnHistory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.as_string())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct KuhnState {
    pub cards: (u8, u8),
    pub history: KuhnHistory,
}

impl KuhnState {
    pub fn new(cards: (u8, u8)) -> Result<Self> {
        if cards.0 as usize >= NUM_CARDS || cards.1 as usize >= NUM_CARDS || cards.0 == cards.1 {
            return Err(Error::InvalidInput(format!("kuhn deal {cards:?}")));
        }
        Ok(KuhnState {
            cards,
            history: KuhnHistory::default(),
        })
    }

    pub fn card(&self, player: usize) -> u8 {
        if player == 0 {
            self.cards.0
        } else {
            self.cards.1
        }
    }

    pub fn to_act(&self) -> usize {
        self.history.player()
    }

    pub fn pot(&self) -> u32 {
        self.history.pot()
    }

    /// Information set of the player to act.
    pub fn infoset(&self) -> Option<usize> {
        let h = self.history.index()?;
        Some(infoset_index(self.card(self.to_act()), h))
    }
}

/// Infoset index `history * 3 + card`.
pub fn infoset_index(card: u8, history: usize) -> usize {
    history * NUM_CARDS + card as usize
}

/// Acting player of an infoset index.
pub fn infoset_player(infoset: usize) -> usize {
    [0, 1, 1, 0][infoset / NUM_CARDS]
}

/// Payoff to player 0 at a terminal history.
fn terminal_payoff(cards: (u8, u8), history: &str) -> i32 {
    let showdown = if cards.0 > cards.1 { 1 } else { -1 };
    match history {
        "pp" => showdown,
        "pbp" => -1,
        "pbb" | "bb" => 2 * showdown,
        "bp" => 1,
        _ => unreachable!("not terminal: {history}"),
    }
}

/// Applies `action`; a terminal successor carries the zero-sum payoffs.
pub fn kuhn_transition(state: &KuhnState, action: KuhnAction) -> Result<(KuhnState, Option<[i32; 2]>)> {
    if state.history.is_terminal() {
        return Err(Error::Terminal);
    }
    let next = KuhnState {
        cards: state.cards,
        history: state.history.push(action),
    };
    let payoff = next.history.is_terminal().then(|| {
        let v = terminal_payoff(next.cards, &next.history.as_string());
        [v, -v]
    });
    Ok((next, payoff))
}

/// Action probabilities per infoset: `[pass, bet]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BehavioralPolicy {
    pub table: [[f64; NUM_KUHN_ACTIONS]; NUM_INFOSETS],
}

impl BehavioralPolicy {
    pub fn uniform() -> Self {
        BehavioralPolicy {
            table: [[0.5; 2]; NUM_INFOSETS],
        }
    }

    /// Rows of a pure strategy for `player` given by bit `i` of `bits` for
    /// that player's `i`-th infoset (1 = bet); other rows stay uniform.
    pub fn pure(player: usize, bits: u32) -> Self {
        let mut p = Self::uniform();
        for (k, infoset) in player_infosets(player).enumerate() {
            let bet = (bits >> k) & 1 == 1;
            p.table[infoset] = if bet { [0.0, 1.0] } else { [1.0, 0.0] };
        }
        p
    }

    /// The Kuhn equilibrium family, parameterized by player 0's jack bluff
    /// frequency `alpha ∈ [0, 1/3]`.
    pub fn nash(alpha: f64) -> Result<Self> {
        if !(0.0..=1.0 / 3.0).contains(&alpha) {
            return Err(Error::InvalidInput(format!("alpha {alpha} outside [0, 1/3]")));
        }
        let mut t = [[0.0; 2]; NUM_INFOSETS];
        let bet = |p: f64| [1.0 - p, p];
        // Player 0, opening.
        t[infoset_index(0, 0)] = bet(alpha);
        t[infoset_index(1, 0)] = bet(0.0);
        t[infoset_index(2, 0)] = bet(3.0 * alpha);
        // Player 0 after check-bet.
        t[infoset_index(0, 3)] = bet(0.0);
        t[infoset_index(1, 3)] = bet(alpha + 1.0 / 3.0);
        t[infoset_index(2, 3)] = bet(1.0);
        // Player 1 after a check.
        t[infoset_index(0, 1)] = bet(1.0 / 3.0);
        t[infoset_index(1, 1)] = bet(0.0);
        t[infoset_index(2, 1)] = bet(1.0);
        // Player 1 facing a bet.
        t[infoset_index(0, 2)] = bet(0.0);
        t[infoset_index(1, 2)] = bet(1.0 / 3.0);
        t[infoset_index(2, 2)] = bet(1.0);
        Ok(BehavioralPolicy { table: t })
    }

    pub fn validate(&self) -> Result<()> {
        for (i, row) in self.table.iter().enumerate() {
            let sum: f64 = row.iter().sum();
            if row.iter().any(|p| !p.is_finite() || *p < 0.0) || (sum - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidInput(format!("infoset {i} row {row:?} is not a distribution")));
            }
        }
        Ok(())
    }

    /// Player 0 rows from `self`, player 1 rows from `other`.
    pub fn combine(p0: &BehavioralPolicy, p1: &BehavioralPolicy) -> Self {
        let mut table = p0.table;
        for i in player_infosets(1) {
            table[i] = p1.table[i];
        }
        BehavioralPolicy { table }
    }
}

/// The six infosets at which `player` acts.
pub fn player_infosets(player: usize) -> impl Iterator<Item = usize> {
    (0..NUM_INFOSETS).filter(move |&i| infoset_player(i) == player)
}

/// Expected payoff to player 0 when player 0 follows `p0` and player 1 `p1`.
pub fn expected_value(p0: &BehavioralPolicy, p1: &BehavioralPolicy) -> Result<f64> {
    p0.validate()?;
    p1.validate()?;
    let joint = BehavioralPolicy::combine(p0, p1);
    let mut total = 0.0;
    for &deal in &DEALS {
        total += node_value(&joint, KuhnState::new(deal).unwrap());
    }
    Ok(total / DEALS.len() as f64)
}

/// Value to player 0 below `state` with both players mixing by `policy`.
fn node_value(policy: &BehavioralPolicy, state: KuhnState) -> f64 {
    let infoset = state.infoset().expect("decision node");
    let mut v = 0.0;
    for a in [KuhnAction::Pass, KuhnAction::Bet] {
        let p = policy.table[infoset][a.index()];
        if p == 0.0 {
            continue;
        }
        let (next, payoff) = kuhn_transition(&state, a).unwrap();
        v += p * match payoff {
            Some([p0, _]) => f64::from(p0),
            None => node_value(policy, next),
        };
    }
    v
}

/// Number of nodes (decision and terminal) in the full Kuhn tree, all deals.
pub fn tree_node_count() -> usize {
    fn count(state: KuhnState) -> usize {
        1 + [KuhnAction::Pass, KuhnAction::Bet]
            .into_iter()
            .map(|a| match kuhn_transition(&state, a).unwrap() {
                (_, Some(_)) => 1,
                (next, None) => count(next),
            })
            .sum::<usize>()
    }
    DEALS.iter().map(|&d| count(KuhnState::new(d).unwrap())).sum()
}

/// Expected payoff to `responder` when it best-responds to the other
/// player's rows of `policy`.
///
/// Responder infosets are solved deepest first: each picks the action with
/// the larger counterfactual value, weighting deals by the opponent's reach.
pub fn exact_best_response_value(policy: &BehavioralPolicy, responder: usize) -> Result<f64> {
    policy.validate()?;
    if responder > 1 {
        return Err(Error::InvalidInput(format!("player {responder}")));
    }
    let sign = if responder == 0 { 1.0 } else { -1.0 };
    let mut choice: [Option<usize>; NUM_INFOSETS] = [None; NUM_INFOSETS];

    // Value to the responder below `state`, opponent reach not included.
    fn value(
        policy: &BehavioralPolicy,
        choice: &[Option<usize>; NUM_INFOSETS],
        responder: usize,
        sign: f64,
        state: KuhnState,
    ) -> f64 {
        let infoset = state.infoset().unwrap();
        let child = |a: KuhnAction| match kuhn_transition(&state, a).unwrap() {
            (_, Some([p0, _])) => sign * f64::from(p0),
            (next, None) => value(policy, choice, responder, sign, next),
        };
        if state.to_act() == responder {
            let a = choice[infoset].expect("deeper responder infosets are solved first");
            child(KuhnAction::from_index(a).unwrap())
        } else {
            policy.table[infoset][0] * child(KuhnAction::Pass)
                + policy.table[infoset][1] * child(KuhnAction::Bet)
        }
    }

    // Opponent reach of `history` (played from deal start) under `policy`.
    let opp_reach = |cards: (u8, u8), history: &str| -> f64 {
        let mut state = KuhnState::new(cards).unwrap();
        let mut reach = 1.0;
        for c in history.chars() {
            let a = if c == 'p' { KuhnAction::Pass } else { KuhnAction::Bet };
            if state.to_act() != responder {
                reach *= policy.table[state.infoset().unwrap()][a.index()];
            }
            state = kuhn_transition(&state, a).unwrap().0;
        }
        reach
    };

    let mut by_depth: Vec<usize> = player_infosets(responder).collect();
    by_depth.sort_by_key(|&i| std::cmp::Reverse(DECISION_HISTORIES[i / NUM_CARDS].len()));
    for infoset in by_depth {
        let card = (infoset % NUM_CARDS) as u8;
        let history = DECISION_HISTORIES[infoset / NUM_CARDS];
        let mut action_values = [0.0; NUM_KUHN_ACTIONS];
        for &deal in DEALS.iter().filter(|d| if responder == 0 { d.0 == card } else { d.1 == card }) {
            let reach = opp_reach(deal, history);
            if reach == 0.0 {
                continue;
            }
            let mut state = KuhnState::new(deal).unwrap();
            for c in history.chars() {
                let a = if c == 'p' { KuhnAction::Pass } else { KuhnAction::Bet };
                state = kuhn_transition(&state, a).unwrap().0;
            }
            for a in [KuhnAction::Pass, KuhnAction::Bet] {
                let v = match kuhn_transition(&state, a).unwrap() {
                    (_, Some([p0, _])) => sign * f64::from(p0),
                    (next, None) => value(policy, &choice, responder, sign, next),
                };
                action_values[a.index()] += reach * v;
            }
        }
        // Ties resolve to pass; either choice attains the same value.
        choice[infoset] = Some(usize::from(action_values[1] > action_values[0]));
    }

    let total: f64 = DEALS
        .iter()
        .map(|&d| value(policy, &choice, responder, sign, KuhnState::new(d).unwrap()))
        .sum();
    Ok(total / DEALS.len() as f64)
}

/// Sum of both players' best-response values: player 0 against `p2`'s
/// player-1 rows plus player 1 against `p1`'s player-0 rows. The game-value
/// terms cancel, so the result is zero exactly at an equilibrium.
pub fn exploitability(p1: &BehavioralPolicy, p2: &BehavioralPolicy) -> Result<f64> {
    let br0 = exact_best_response_value(p2, 0)?;
    let br1 = exact_best_response_value(p1, 1)?;
    Ok(br0 + br1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(cards: (u8, u8), h: &str) -> Option<[i32; 2]> {
        let mut s = KuhnState::new(cards).unwrap();
        let mut pay = None;
        for c in h.chars() {
            let a = if c == 'p' { KuhnAction::Pass } else { KuhnAction::Bet };
            let (n, p) = kuhn_transition(&s, a).unwrap();
            s = n;
            pay = p;
        }
        pay
    }

    #[test]
    fn showdown_and_fold_payoffs() {
        assert_eq!(run((2, 0), "bb"), Some([2, -2]));
        assert_eq!(run((0, 2), "bb"), Some([-2, 2]));
        for deal in DEALS {
            assert_eq!(run(deal, "bp"), Some([1, -1]));
            assert_eq!(run(deal, "pbp"), Some([-1, 1]));
        }
        assert_eq!(run((1, 0), "pp"), Some([1, -1]));
    }

    #[test]
    fn transition_errors() {
        let mut s = KuhnState::new((0, 1)).unwrap();
        s = kuhn_transition(&s, KuhnAction::Bet).unwrap().0;
        s = kuhn_transition(&s, KuhnAction::Pass).unwrap().0;
        assert!(kuhn_transition(&s, KuhnAction::Bet).is_err());
        assert!(KuhnState::new((1, 1)).is_err());
        assert!(KuhnHistory::parse("ppb").is_err());
    }

    #[test]
    fn pots() {
        for (h, pot) in [("", 2), ("p", 2), ("b", 3), ("pb", 3), ("bb", 4), ("pbb", 4), ("bp", 3)] {
            assert_eq!(KuhnHistory::parse(h).unwrap().pot(), pot, "{h}");
        }
    }

    #[test]
    fn node_count() {
        // 4 decision + 5 terminal histories per deal.
        assert_eq!(tree_node_count(), 6 * 9);
    }

    #[test]
    fn nash_value_and_zero_exploitability() {
        for alpha in [0.0, 0.1, 1.0 / 3.0] {
            let p = BehavioralPolicy::nash(alpha).unwrap();
            let br0 = exact_best_response_value(&p, 0).unwrap();
            assert!((br0 + 1.0 / 18.0).abs() < 1e-12, "{br0}");
            assert!(exploitability(&p, &p).unwrap().abs() < 1e-12);
            assert!((expected_value(&p, &p).unwrap() + 1.0 / 18.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_malformed_rows() {
        let mut p = BehavioralPolicy::uniform();
        p.table[4] = [0.7, 0.7];
        assert!(exact_best_response_value(&p, 0).is_err());
        p.table[4] = [-0.1, 1.1];
        assert!(exploitability(&p, &p).is_err());
    }
}
