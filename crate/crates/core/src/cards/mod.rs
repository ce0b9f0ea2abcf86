//! Cards, hand evaluation and equity heuristics.

mod card;
mod equity;
mod eval;
mod preflop;

pub use card::{new_deck_shuffled, parse_cards, Card, SUIT_CHARS};
pub use equity::{
    equity_enumerate, equity_mc, opponent_strength_mc, opponent_strength_mc_with_dead,
    EquityEstimate, DEFAULT_MC_SAMPLES,
};
pub use eval::{rank5, rank7, Category, HandAccumulator, HandClass, NUM_CLASSES};
pub(crate) use eval::evaluate;
pub use preflop::{
    compute_exact_preflop_table, preflop_class_name, preflop_rank, preflop_table_text, PreflopClass,
    PreflopRank, PreflopTable, NUM_PREFLOP_CLASSES,
};

use crate::{Error, Result};

/// Rejects duplicated cards in `cards`.
pub(crate) fn check_distinct(cards: &[Card]) -> Result<()> {
    let mut seen = 0u64;
    for &c in cards {
        let bit = 1u64 << c.index();
        if seen & bit != 0 {
            return Err(Error::DuplicateCard(c));
        }
        seen |= bit;
    }
    Ok(())
}
