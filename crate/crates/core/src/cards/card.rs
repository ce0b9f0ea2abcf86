use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

const RANK_CHARS: [char; 13] = ['2', '3', '4', '5', '6', '7', '8', '9', 'T', 'J', 'Q', 'K', 'A'];

/// Suit letters in index order: spades, hearts, diamonds, clubs.
pub const SUIT_CHARS: [char; 4] = ['s', 'h', 'd', 'c'];

const SUIT_SYMBOLS: [char; 4] = ['♠', '♥', '♦', '♣'];

/// A playing card. Rank 0 is a deuce and 12 an ace; suits follow [`SUIT_CHARS`].
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Card(u8);

impl Card {
    pub fn new(rank: u8, suit: u8) -> Result<Self> {
        if rank > 12 || suit > 3 {
            return Err(Error::InvalidInput(format!("card rank {rank} suit {suit}")));
        }
        Ok(Card(rank * 4 + suit))
    }

    /// `index` in `0..52`, ordered by rank then suit.
    pub fn from_index(index: usize) -> Self {
        assert!(index < 52, "card index {index} out of range");
        Card(index as u8)
    }

    #[inline]
    pub const fn index(self) -> usize {
        self.0 as usize
    }

    #[inline]
    pub const fn rank(self) -> u8 {
        self.0 >> 2
    }

    #[inline]
    pub const fn suit(self) -> u8 {
        self.0 & 3
    }

    pub fn all() -> impl Iterator<Item = Card> {
        (0..52u8).map(Card)
    }

    pub fn rank_char(self) -> char {
        RANK_CHARS[self.rank() as usize]
    }
}

impl fmt::Display for Card {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.rank_char(), SUIT_CHARS[self.suit() as usize])
    }
}

impl fmt::Debug for Card {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Card {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut chars = s.trim().chars();
        let (Some(r), Some(su), None) = (chars.next(), chars.next(), chars.next()) else {
            return Err(Error::InvalidInput(format!("bad card {s:?}")));
        };
        let rank = RANK_CHARS
            .iter()
            .position(|&c| c == r.to_ascii_uppercase())
            .ok_or_else(|| Error::InvalidInput(format!("bad rank in {s:?}")))?;
        let suit = SUIT_CHARS
            .iter()
            .position(|&c| c == su.to_ascii_lowercase())
            .or_else(|| SUIT_SYMBOLS.iter().position(|&c| c == su))
            .ok_or_else(|| Error::InvalidInput(format!("bad suit in {s:?}")))?;
        Card::new(rank as u8, suit as u8)
    }
}

impl TryFrom<String> for Card {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Card> for String {
    fn from(c: Card) -> String {
        c.to_string()
    }
}

/// Parses a run of cards such as `"AsKd"`, `"As Kd 2c"` or `"A♠,K♦"`.
pub fn parse_cards(s: &str) -> Result<Vec<Card>> {
    let chars: Vec<char> = s
        .chars()
        .filter(|c| !c.is_whitespace() && *c != ',')
        .collect();
    if !chars.len().is_multiple_of(2) {
        return Err(Error::InvalidInput(format!("odd card string {s:?}")));
    }
    chars
        .chunks(2)
        .map(|pair| pair.iter().collect::<String>().parse())
        .collect()
}

/// A seeded permutation of the 52-card deck.
pub fn new_deck_shuffled(seed: u64) -> [Card; 52] {
    let mut deck: [Card; 52] = std::array::from_fn(|i| Card(i as u8));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    deck.shuffle(&mut rng);
    deck
}
