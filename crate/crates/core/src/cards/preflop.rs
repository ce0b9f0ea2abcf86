//! Preflop classes (13 pairs, 78 suited, 78 offsuit) ranked by exact all-in
//! equity against a uniformly random opponent hole.
//!
//! The ranking ships as `data/preflop_ranks.txt` (`canonical_hand,rank`) with
//! the exact win counts behind it in `data/preflop_equity.txt`
//! (`canonical_hand,wins2,total`, where `wins2` counts a win as 2 and a tie
//! as 1). Both are reproduced by [`compute_exact_preflop_table`].

use std::cmp::Ordering;
use std::sync::OnceLock;

use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use super::eval::HandAccumulator;
use super::{check_distinct, Card};
use crate::{Error, Result};

pub const NUM_PREFLOP_CLASSES: usize = 169;

const RANKS_TXT: &str = include_str!("../../data/preflop_ranks.txt");
const EQUITY_TXT: &str = include_str!("../../data/preflop_equity.txt");

/// Canonical two-card class, a cell of the 13×13 grid: pairs on the
/// diagonal, suited hands at `(high, low)` and offsuit hands at `(low, high)`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct PreflopClass(u8);

impl PreflopClass {
    pub fn of(a: Card, b: Card) -> Self {
        let (hi, lo) = if a.rank() >= b.rank() { (a, b) } else { (b, a) };
        let (h, l) = (hi.rank() as usize, lo.rank() as usize);
        let cell = if h == l {
            h * 13 + h
        } else if hi.suit() == lo.suit() {
            h * 13 + l
        } else {
            l * 13 + h
        };
        PreflopClass(cell as u8)
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn all() -> impl Iterator<Item = PreflopClass> {
        (0..169u8).map(PreflopClass)
    }

    /// (high rank, low rank, suited)
    fn parts(self) -> (u8, u8, bool) {
        let (r, c) = (self.0 / 13, self.0 % 13);
        match r.cmp(&c) {
            Ordering::Equal => (r, r, false),
            Ordering::Greater => (r, c, true),
            Ordering::Less => (c, r, false),
        }
    }

    pub fn is_pair(self) -> bool {
        let (h, l, _) = self.parts();
        h == l
    }

    /// Number of concrete holes in the class: 6, 4 or 12.
    pub fn combos(self) -> u32 {
        match self.parts() {
            (h, l, _) if h == l => 6,
            (_, _, true) => 4,
            _ => 12,
        }
    }

    pub fn name(self) -> String {
        let (h, l, suited) = self.parts();
        let hc = Card::new(h, 0).unwrap().rank_char();
        let lc = Card::new(l, 0).unwrap().rank_char();
        match (h == l, suited) {
            (true, _) => format!("{hc}{lc}"),
            (false, true) => format!("{hc}{lc}s"),
            (false, false) => format!("{hc}{lc}o"),
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        PreflopClass::all()
            .find(|c| c.name() == name)
            .ok_or_else(|| Error::InvalidInput(format!("preflop class {name:?}")))
    }

    /// Tie-break key: pairs first, then higher ranks, suited before offsuit.
    fn tiebreak(self) -> (bool, u8, u8, bool) {
        let (h, l, s) = self.parts();
        (h == l, h, l, s)
    }
}

pub fn preflop_class_name(class: PreflopClass) -> String {
    class.name()
}

/// Rank of a preflop class, 1 (aces) to 169.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PreflopRank(u8);

impl PreflopRank {
    pub fn value(self) -> u8 {
        self.0
    }

    /// `1 − (rank − 1)/168`
    pub fn normalized(self) -> f64 {
        1.0 - f64::from(self.0 - 1) / 168.0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PreflopTable {
    rank: [u8; NUM_PREFLOP_CLASSES],
    wins2: [u64; NUM_PREFLOP_CLASSES],
    total: [u64; NUM_PREFLOP_CLASSES],
}

impl PreflopTable {
    /// The shipped table.
    pub fn get() -> &'static PreflopTable {
        static TABLE: OnceLock<PreflopTable> = OnceLock::new();
        TABLE.get_or_init(|| {
            PreflopTable::from_texts(RANKS_TXT, EQUITY_TXT).expect("embedded preflop table is valid")
        })
    }

    pub fn rank(&self, class: PreflopClass) -> PreflopRank {
        PreflopRank(self.rank[class.index()])
    }

    pub fn exact_equity(&self, class: PreflopClass) -> (u64, u64) {
        (self.wins2[class.index()], self.total[class.index()])
    }

    pub fn equity(&self, class: PreflopClass) -> f64 {
        let (w, t) = self.exact_equity(class);
        w as f64 / (2 * t) as f64
    }

    fn from_equities(wins2: [u64; NUM_PREFLOP_CLASSES], total: [u64; NUM_PREFLOP_CLASSES]) -> Self {
        let mut order: Vec<PreflopClass> = PreflopClass::all().collect();
        order.sort_by(|a, b| {
            let (ia, ib) = (a.index(), b.index());
            // Descending wins2/total, compared exactly.
            let lhs = u128::from(wins2[ib]) * u128::from(total[ia]);
            let rhs = u128::from(wins2[ia]) * u128::from(total[ib]);
            lhs.cmp(&rhs).then_with(|| b.tiebreak().cmp(&a.tiebreak()))
        });
        let mut rank = [0u8; NUM_PREFLOP_CLASSES];
        for (i, c) in order.iter().enumerate() {
            rank[c.index()] = i as u8 + 1;
        }
        PreflopTable { rank, wins2, total }
    }

    fn ordered(&self) -> Vec<PreflopClass> {
        let mut order: Vec<PreflopClass> = PreflopClass::all().collect();
        order.sort_by_key(|c| self.rank[c.index()]);
        order
    }

    /// `canonical_hand,rank` lines, best class first.
    pub fn ranks_text(&self) -> String {
        self.ordered()
            .iter()
            .map(|c| format!("{},{}\n", c.name(), self.rank[c.index()]))
            .collect()
    }

    /// `canonical_hand,wins2,total` lines in rank order.
    pub fn equity_text(&self) -> String {
        self.ordered()
            .iter()
            .map(|c| format!("{},{},{}\n", c.name(), self.wins2[c.index()], self.total[c.index()]))
            .collect()
    }

    /// Parses both text forms, checking that the ranks agree with the counts.
    pub fn from_texts(ranks: &str, equity: &str) -> Result<Self> {
        let mut wins2 = [0u64; NUM_PREFLOP_CLASSES];
        let mut total = [0u64; NUM_PREFLOP_CLASSES];
        let mut seen = [false; NUM_PREFLOP_CLASSES];
        for line in equity.lines().filter(|l| !l.trim().is_empty()) {
            let f: Vec<&str> = line.split(',').collect();
            let [name, w, t] = f[..] else {
                return Err(Error::Format(format!("preflop equity line {line:?}")));
            };
            let c = PreflopClass::parse(name)?;
            let parse = |s: &str| {
                s.trim()
                    .parse::<u64>()
                    .map_err(|e| Error::Format(format!("{line:?}: {e}")))
            };
            wins2[c.index()] = parse(w)?;
            total[c.index()] = parse(t)?;
            seen[c.index()] = true;
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::Format("preflop equity table is incomplete".into()));
        }
        let table = PreflopTable::from_equities(wins2, total);
        if table.ranks_text() != ranks {
            return Err(Error::Format("preflop ranks disagree with the equity counts".into()));
        }
        Ok(table)
    }
}

/// Rank of a two-card starting hand.
pub fn preflop_rank(hole: &[Card]) -> Result<PreflopRank> {
    if hole.len() != 2 {
        return Err(Error::InvalidInput(format!("hole needs 2 cards, got {}", hole.len())));
    }
    check_distinct(hole)?;
    Ok(PreflopTable::get().rank(PreflopClass::of(hole[0], hole[1])))
}

pub fn preflop_table_text() -> &'static str {
    RANKS_TXT
}

fn pack(cards: &[u8; 5]) -> u32 {
    cards
        .iter()
        .fold(0u32, |acc, &c| (acc << 6) | u32::from(c))
}

fn unpack(key: u32) -> [u8; 5] {
    std::array::from_fn(|i| ((key >> (6 * (4 - i))) & 63) as u8)
}

fn suit_permutations() -> Vec<[u8; 4]> {
    let mut out = Vec::with_capacity(24);
    for a in 0..4u8 {
        for b in 0..4u8 {
            for c in 0..4u8 {
                for d in 0..4u8 {
                    let p = [a, b, c, d];
                    let mut seen = [false; 4];
                    p.iter().for_each(|&s| seen[s as usize] = true);
                    if seen.iter().all(|&s| s) {
                        out.push(p);
                    }
                }
            }
        }
    }
    out
}

/// Exhaustive preflop equities over all C(52,5) boards and all opponent holes.
///
/// Boards are folded into suit-isomorphism orbits; class totals are invariant
/// under suit relabeling, so each canonical board is weighted by its orbit size.
pub fn compute_exact_preflop_table() -> PreflopTable {
    let perms = suit_permutations();
    let mut orbits: FxHashMap<u32, u64> = FxHashMap::default();
    let mut board = [0u8; 5];
    for a in 0..52u8 {
        for b in a + 1..52 {
            for c in b + 1..52 {
                for d in c + 1..52 {
                    for e in d + 1..52 {
                        let cards = [a, b, c, d, e];
                        let mut best = u32::MAX;
                        for p in &perms {
                            for (slot, &x) in board.iter_mut().zip(&cards) {
                                *slot = (x & !3) | p[(x & 3) as usize];
                            }
                            board.sort_unstable();
                            best = best.min(pack(&board));
                        }
                        *orbits.entry(best).or_default() += 1;
                    }
                }
            }
        }
    }

    let mut wins2 = [0u64; NUM_PREFLOP_CLASSES];
    let mut total = [0u64; NUM_PREFLOP_CLASSES];
    let mut keys: Vec<(u32, u64)> = orbits.into_iter().collect();
    keys.sort_unstable();

    let mut holes: Vec<(u8, u8)> = Vec::with_capacity(1081);
    let mut ranks: Vec<u16> = Vec::with_capacity(1081);
    let mut sorted_all: Vec<u16> = Vec::with_capacity(1081);
    let mut per_card: Vec<Vec<u16>> = (0..52).map(|_| Vec::with_capacity(46)).collect();
    for (key, weight) in keys {
        let board = unpack(key);
        let mut used = 0u64;
        for &c in &board {
            used |= 1 << c;
        }
        let acc = HandAccumulator::from_cards(&board.map(|c| Card::from_index(c as usize)));
        let rest: Vec<u8> = (0..52u8).filter(|c| used & (1 << c) == 0).collect();
        holes.clear();
        ranks.clear();
        per_card.iter_mut().for_each(Vec::clear);
        for i in 0..rest.len() {
            let hi = acc.with(Card::from_index(rest[i] as usize));
            for &cj in &rest[i + 1..] {
                let r = hi.with(Card::from_index(cj as usize)).class().value();
                holes.push((rest[i], cj));
                ranks.push(r);
                per_card[rest[i] as usize].push(r);
                per_card[cj as usize].push(r);
            }
        }
        sorted_all.clear();
        sorted_all.extend_from_slice(&ranks);
        sorted_all.sort_unstable();
        for &c in &rest {
            per_card[c as usize].sort_unstable();
        }
        // (strictly worse, equal) counts among a sorted rank list.
        let split = |v: &[u16], r: u16| {
            let lo = v.partition_point(|&x| x < r);
            let hi = v.partition_point(|&x| x <= r);
            ((v.len() - hi) as u64, (hi - lo) as u64)
        };
        for (&(c1, c2), &r) in holes.iter().zip(&ranks) {
            let (w_all, t_all) = split(&sorted_all, r);
            let (w1, t1) = split(&per_card[c1 as usize], r);
            let (w2, t2) = split(&per_card[c2 as usize], r);
            let wins = w_all - w1 - w2;
            let ties = t_all + 1 - t1 - t2;
            let class = PreflopClass::of(Card::from_index(c1 as usize), Card::from_index(c2 as usize));
            wins2[class.index()] += weight * (2 * wins + ties);
            total[class.index()] += weight * 990;
        }
    }
    PreflopTable::from_equities(wins2, total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cards::parse_cards;

    #[test]
    fn classes_partition_all_holes() {
        let mut sizes = [0u32; NUM_PREFLOP_CLASSES];
        for a in 0..52 {
            for b in a + 1..52 {
                sizes[PreflopClass::of(Card::from_index(a), Card::from_index(b)).index()] += 1;
            }
        }
        let mut pairs = 0;
        let mut suited = 0;
        let mut offsuit = 0;
        for c in PreflopClass::all() {
            assert_eq!(sizes[c.index()], c.combos());
            match c.combos() {
                6 => pairs += 1,
                4 => suited += 1,
                _ => offsuit += 1,
            }
        }
        assert_eq!((pairs, suited, offsuit), (13, 78, 78));
    }

    #[test]
    fn suit_isomorphism() {
        let r = |s: &str| preflop_rank(&parse_cards(s).unwrap()).unwrap();
        assert_eq!(r("AsKs"), r("AhKh"));
        assert_eq!(r("AsKs"), r("KsAs"));
        assert_ne!(r("AsKs"), r("AsKh"));
        assert_eq!(r("AsAh").value(), 1);
    }

    #[test]
    fn names_round_trip() {
        for c in PreflopClass::all() {
            assert_eq!(PreflopClass::parse(&c.name()).unwrap(), c);
        }
        assert_eq!(PreflopClass::of("Ks".parse().unwrap(), "Ad".parse().unwrap()).name(), "AKo");
    }

    #[test]
    fn rejects_bad_holes() {
        assert!(preflop_rank(&parse_cards("AsAs").unwrap()).is_err());
        assert!(preflop_rank(&parse_cards("As").unwrap()).is_err());
    }
}
