use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::eval::HandAccumulator;
use super::{check_distinct, Card, PreflopTable};
use crate::{Error, Result};

/// Monte-Carlo budget used by in-loop heuristics.
pub const DEFAULT_MC_SAMPLES: usize = 1000;

/// Win rate against a uniformly random opponent hole, ties counted as half.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquityEstimate {
    pub win_rate: f64,
    pub samples: u64,
}

fn check_spot(hole: &[Card], board: &[Card]) -> Result<()> {
    if hole.len() != 2 {
        return Err(Error::InvalidInput(format!("hole needs 2 cards, got {}", hole.len())));
    }
    if !matches!(board.len(), 0 | 3 | 4 | 5) {
        return Err(Error::InvalidInput(format!("board of {} cards", board.len())));
    }
    let all: Vec<Card> = hole.iter().chain(board).copied().collect();
    check_distinct(&all)
}

fn remaining(dead: &[Card]) -> Vec<Card> {
    let mut used = 0u64;
    for c in dead {
        used |= 1 << c.index();
    }
    Card::all().filter(|c| used & (1 << c.index()) == 0).collect()
}

/// Exact equity over every board completion and every opponent hole.
///
/// Preflop spots are read from the exact preflop table, which was produced by
/// the same enumeration over all boards.
pub fn equity_enumerate(hole: &[Card], board: &[Card]) -> Result<EquityEstimate> {
    check_spot(hole, board)?;
    if board.is_empty() {
        let table = PreflopTable::get();
        let class = super::PreflopClass::of(hole[0], hole[1]);
        let (wins2, total) = table.exact_equity(class);
        return Ok(EquityEstimate {
            win_rate: wins2 as f64 / (2 * total) as f64,
            samples: total,
        });
    }
    let dead: Vec<Card> = hole.iter().chain(board).copied().collect();
    let rest = remaining(&dead);
    let base = HandAccumulator::from_cards(board);
    let mut wins2 = 0u64;
    let mut total = 0u64;
    let mut tally = |full: HandAccumulator, used: u64| {
        let hero = full.with(hole[0]).with(hole[1]).class();
        let live: Vec<Card> = rest
            .iter()
            .copied()
            .filter(|c| used & (1 << c.index()) == 0)
            .collect();
        for i in 0..live.len() {
            for j in i + 1..live.len() {
                let villain = full.with(live[i]).with(live[j]).class();
                wins2 += match hero.cmp(&villain) {
                    std::cmp::Ordering::Less => 2,
                    std::cmp::Ordering::Equal => 1,
                    std::cmp::Ordering::Greater => 0,
                };
                total += 1;
            }
        }
    };
    match board.len() {
        5 => tally(base, 0),
        4 => {
            for &c in &rest {
                tally(base.with(c), 1 << c.index());
            }
        }
        3 => {
            for i in 0..rest.len() {
                for j in i + 1..rest.len() {
                    let used = (1 << rest[i].index()) | (1 << rest[j].index());
                    tally(base.with(rest[i]).with(rest[j]), used);
                }
            }
        }
        _ => unreachable!(),
    }
    Ok(EquityEstimate {
        win_rate: wins2 as f64 / (2 * total) as f64,
        samples: total,
    })
}

/// Draws `k` cards without replacement into the front of `pool`.
#[inline]
fn partial_shuffle(pool: &mut [Card], k: usize, rng: &mut impl Rng) {
    for i in 0..k {
        let j = rng.random_range(i..pool.len());
        pool.swap(i, j);
    }
}

/// Monte-Carlo equity against a random opponent hole and random board completion.
pub fn equity_mc(hole: &[Card], board: &[Card], n_samples: usize, seed: u64) -> Result<EquityEstimate> {
    check_spot(hole, board)?;
    if n_samples == 0 {
        return Err(Error::InvalidInput("n_samples must be at least 1".into()));
    }
    let dead: Vec<Card> = hole.iter().chain(board).copied().collect();
    let mut pool = remaining(&dead);
    let missing = 5 - board.len();
    let base = HandAccumulator::from_cards(board);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut wins2 = 0u64;
    for _ in 0..n_samples {
        partial_shuffle(&mut pool, missing + 2, &mut rng);
        let mut full = base;
        for &c in &pool[2..2 + missing] {
            full.add(c);
        }
        let hero = full.with(hole[0]).with(hole[1]).class();
        let villain = full.with(pool[0]).with(pool[1]).class();
        wins2 += match hero.cmp(&villain) {
            std::cmp::Ordering::Less => 2,
            std::cmp::Ordering::Equal => 1,
            std::cmp::Ordering::Greater => 0,
        };
    }
    Ok(EquityEstimate {
        win_rate: wins2 as f64 / (2 * n_samples) as f64,
        samples: n_samples as u64,
    })
}

/// Mean normalized strength of a random opponent hand on `board`.
pub fn opponent_strength_mc(board: &[Card], n_samples: usize, seed: u64) -> Result<EquityEstimate> {
    opponent_strength_mc_with_dead(board, &[], n_samples, seed)
}

/// As [`opponent_strength_mc`], additionally excluding `dead` cards (the
/// viewer's own hole) from the opponent's possible holdings.
pub fn opponent_strength_mc_with_dead(
    board: &[Card],
    dead: &[Card],
    n_samples: usize,
    seed: u64,
) -> Result<EquityEstimate> {
    if !(3..=5).contains(&board.len()) {
        return Err(Error::InvalidInput(format!(
            "opponent strength needs a flop, turn or river board, got {} cards",
            board.len()
        )));
    }
    if n_samples == 0 {
        return Err(Error::InvalidInput("n_samples must be at least 1".into()));
    }
    let used: Vec<Card> = board.iter().chain(dead).copied().collect();
    check_distinct(&used)?;
    let mut pool = remaining(&used);
    let missing = 5 - board.len();
    let base = HandAccumulator::from_cards(board);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sum = 0.0;
    for _ in 0..n_samples {
        partial_shuffle(&mut pool, missing + 2, &mut rng);
        let hand = pool[..missing + 2]
            .iter()
            .fold(base, |acc, &c| acc.with(c));
        sum += hand.class().strength();
    }
    Ok(EquityEstimate {
        win_rate: sum / n_samples as f64,
        samples: n_samples as u64,
    })
}
