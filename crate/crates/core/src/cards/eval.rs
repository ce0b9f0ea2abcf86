//! The 7462-class five-card evaluator.
//!
//! Classes are generated at first use by enumerating every rank pattern and
//! sorting by standard poker strength; class 1 is the royal flush and 7462 is
//! 7-5-4-3-2 offsuit. Two lookup tables serve hands of 5 to 7 cards:
//!
//! * `flush` maps a 13-bit rank mask (five or more bits) to the best flush or
//!   straight flush it contains;
//! * `multiset` maps a base-5 rank-count key to the best non-flush class.
//!
//! A hand with five or more cards of one suit can never also hold quads or a
//! full house among seven cards, so the flush table alone decides it.

use std::cmp::Reverse;
use std::fmt;
use std::sync::OnceLock;

use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use super::{check_distinct, Card};
use crate::{Error, Result};

pub const NUM_CLASSES: u16 = 7462;

const POW5: [u32; 13] = {
    let mut p = [1u32; 13];
    let mut i = 1;
    while i < 13 {
        p[i] = p[i - 1] * 5;
        i += 1;
    }
    p
};

/// Equivalence class of a poker hand: 1 is the strongest, 7462 the weakest.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
#[serde(transparent)]
pub struct HandClass(u16);

impl HandClass {
    pub fn new(value: u16) -> Result<Self> {
        if value == 0 || value > NUM_CLASSES {
            return Err(Error::InvalidInput(format!("hand class {value}")));
        }
        Ok(HandClass(value))
    }

    #[inline]
    pub const fn value(self) -> u16 {
        self.0
    }

    /// Normalized strength `1 − (class − 1)/7461`, 1.0 for a royal flush.
    #[inline]
    pub fn strength(self) -> f64 {
        1.0 - f64::from(self.0 - 1) / f64::from(NUM_CLASSES - 1)
    }

    pub fn category(self) -> Category {
        match self.0 {
            1..=10 => Category::StraightFlush,
            11..=166 => Category::FourOfAKind,
            167..=322 => Category::FullHouse,
            323..=1599 => Category::Flush,
            1600..=1609 => Category::Straight,
            1610..=2467 => Category::ThreeOfAKind,
            2468..=3325 => Category::TwoPair,
            3326..=6185 => Category::OnePair,
            _ => Category::HighCard,
        }
    }
}

impl fmt::Display for HandClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({})", self.0, self.category())
    }
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    HighCard,
    OnePair,
    TwoPair,
    ThreeOfAKind,
    Straight,
    Flush,
    FullHouse,
    FourOfAKind,
    StraightFlush,
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Category::HighCard => "high card",
            Category::OnePair => "one pair",
            Category::TwoPair => "two pair",
            Category::ThreeOfAKind => "three of a kind",
            Category::Straight => "straight",
            Category::Flush => "flush",
            Category::FullHouse => "full house",
            Category::FourOfAKind => "four of a kind",
            Category::StraightFlush => "straight flush",
        };
        f.write_str(s)
    }
}

struct Tables {
    flush: Vec<u16>,
    multiset: FxHashMap<u32, u16>,
}

fn tables() -> &'static Tables {
    static TABLES: OnceLock<Tables> = OnceLock::new();
    TABLES.get_or_init(build_tables)
}

/// Top rank of the straight formed by a 5-bit rank mask, if any.
fn straight_top(mask: u16) -> Option<u8> {
    if mask == 0b1_0000_0000_1111 {
        return Some(3);
    }
    let low = mask.trailing_zeros() as u16;
    (mask >> low == 0b11111).then_some(low as u8 + 4)
}

#[derive(Clone, Copy)]
enum Pattern {
    Flush(u16),
    NonFlush(u32),
}

fn build_tables() -> Tables {
    // (category, tiebreak ranks) sorted descending gives class order.
    let mut patterns: Vec<((Category, Vec<u8>), Pattern)> = Vec::with_capacity(NUM_CLASSES as usize);

    for mask in 0u16..(1 << 13) {
        if mask.count_ones() != 5 {
            continue;
        }
        let ranks_desc: Vec<u8> = (0..13u8).rev().filter(|r| mask & (1 << r) != 0).collect();
        let key: u32 = ranks_desc.iter().map(|&r| POW5[r as usize]).sum();
        let (flush_key, plain_key) = match straight_top(mask) {
            Some(top) => (
                (Category::StraightFlush, vec![top]),
                (Category::Straight, vec![top]),
            ),
            None => (
                (Category::Flush, ranks_desc.clone()),
                (Category::HighCard, ranks_desc),
            ),
        };
        patterns.push((flush_key, Pattern::Flush(mask)));
        patterns.push((plain_key, Pattern::NonFlush(key)));
    }

    let mut counts = [0u8; 13];
    paired_patterns(&mut counts, 0, 5, &mut patterns);

    patterns.sort_by(|a, b| b.0.cmp(&a.0));
    assert_eq!(patterns.len(), NUM_CLASSES as usize);

    let mut flush = vec![0u16; 1 << 13];
    let mut multiset = FxHashMap::default();
    for (i, (_, pat)) in patterns.iter().enumerate() {
        let class = i as u16 + 1;
        match *pat {
            Pattern::Flush(mask) => flush[mask as usize] = class,
            Pattern::NonFlush(key) => {
                multiset.insert(key, class);
            }
        }
    }

    // Flush masks with 6 or 7 bits: best 5-bit sub-mask.
    for bits in 6..=7u32 {
        for mask in 0u16..(1 << 13) {
            if mask.count_ones() != bits {
                continue;
            }
            let best = (0..13)
                .filter(|r| mask & (1 << r) != 0)
                .map(|r| flush[(mask & !(1 << r)) as usize])
                .min()
                .unwrap();
            flush[mask as usize] = best;
        }
    }

    // Rank multisets of 6 and 7 cards: best after dropping one card.
    for size in 6..=7u8 {
        let mut found = Vec::new();
        let mut counts = [0u8; 13];
        multisets(&mut counts, 0, size, &mut found);
        for key in found {
            let best = (0..13)
                .filter(|&r| !(key / POW5[r]).is_multiple_of(5))
                .map(|r| multiset[&(key - POW5[r])])
                .min()
                .unwrap();
            multiset.insert(key, best);
        }
    }

    Tables { flush, multiset }
}

fn counts_key(counts: &[u8; 13]) -> u32 {
    counts
        .iter()
        .zip(POW5)
        .map(|(&c, p)| u32::from(c) * p)
        .sum()
}

/// Every rank-count vector summing to `left` more cards, counts at most 4.
fn multisets(counts: &mut [u8; 13], from: usize, left: u8, out: &mut Vec<u32>) {
    if left == 0 {
        out.push(counts_key(counts));
        return;
    }
    for r in from..13 {
        if counts[r] < 4 {
            counts[r] += 1;
            multisets(counts, r, left - 1, out);
            counts[r] -= 1;
        }
    }
}

/// Five-card multisets with at least one repeated rank.
fn paired_patterns(
    counts: &mut [u8; 13],
    from: usize,
    left: u8,
    out: &mut Vec<((Category, Vec<u8>), Pattern)>,
) {
    if left == 0 {
        if counts.iter().all(|&c| c <= 1) {
            return;
        }
        let mut groups: Vec<(u8, u8)> = (0..13u8)
            .filter(|&r| counts[r as usize] > 0)
            .map(|r| (counts[r as usize], r))
            .collect();
        groups.sort_by_key(|&(c, r)| Reverse((c, r)));
        let shape: Vec<u8> = groups.iter().map(|g| g.0).collect();
        let category = match shape.as_slice() {
            [4, 1] => Category::FourOfAKind,
            [3, 2] => Category::FullHouse,
            [3, 1, 1] => Category::ThreeOfAKind,
            [2, 2, 1] => Category::TwoPair,
            [2, 1, 1, 1] => Category::OnePair,
            _ => unreachable!("shape {shape:?}"),
        };
        let tiebreak = groups.iter().map(|g| g.1).collect();
        out.push(((category, tiebreak), Pattern::NonFlush(counts_key(counts))));
        return;
    }
    for r in from..13 {
        if counts[r] < 4 {
            counts[r] += 1;
            paired_patterns(counts, r, left - 1, out);
            counts[r] -= 1;
        }
    }
}

/// Incremental hand state: add cards one at a time, then [`HandAccumulator::class`].
///
/// Cheap to copy, so a shared board can be extended by each candidate hole.
#[derive(Clone, Copy, Default, Debug)]
pub struct HandAccumulator {
    key: u32,
    suits: [u16; 4],
    len: u8,
}

impl HandAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_cards(cards: &[Card]) -> Self {
        let mut acc = Self::new();
        for &c in cards {
            acc.add(c);
        }
        acc
    }

    #[inline]
    pub fn add(&mut self, card: Card) {
        self.key += POW5[card.rank() as usize];
        self.suits[card.suit() as usize] |= 1 << card.rank();
        self.len += 1;
    }

    #[inline]
    pub fn with(mut self, card: Card) -> Self {
        self.add(card);
        self
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Best class among the accumulated cards; needs 5 to 7 distinct cards.
    #[inline]
    pub fn class(&self) -> HandClass {
        debug_assert!((5..=7).contains(&self.len), "{} cards", self.len);
        let t = tables();
        for &mask in &self.suits {
            if mask.count_ones() >= 5 {
                return HandClass(t.flush[mask as usize]);
            }
        }
        HandClass(t.multiset[&self.key])
    }
}

/// Unchecked evaluation of 5 to 7 distinct cards.
#[inline]
pub(crate) fn evaluate(cards: &[Card]) -> HandClass {
    HandAccumulator::from_cards(cards).class()
}

/// Class of exactly five distinct cards.
pub fn rank5(cards: &[Card]) -> Result<HandClass> {
    if cards.len() != 5 {
        return Err(Error::InvalidInput(format!("rank5 needs 5 cards, got {}", cards.len())));
    }
    check_distinct(cards)?;
    Ok(evaluate(cards))
}

/// Best five-card class among exactly seven distinct cards.
pub fn rank7(cards: &[Card]) -> Result<HandClass> {
    if cards.len() != 7 {
        return Err(Error::InvalidInput(format!("rank7 needs 7 cards, got {}", cards.len())));
    }
    check_distinct(cards)?;
    Ok(evaluate(cards))
}
