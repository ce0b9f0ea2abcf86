//! Replay stores: a circular transition buffer and a reservoir of behavior.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result};

pub const DEFAULT_RL_CAPACITY: usize = 200_000;
pub const DEFAULT_SL_CAPACITY: usize = 1_000_000;
pub const DEFAULT_MIN_REPLAY: usize = 1_000;

#[derive(Clone, Debug, PartialEq)]
pub struct Transition<O> {
    pub s: O,
    pub a: u8,
    /// Normalized reward.
    pub r: f32,
    /// Successor observation; a copy of `s` when `terminal` is set.
    pub s_next: O,
    pub terminal: bool,
    /// Bit `i` set when action `i` is legal at `s_next`.
    pub next_legal: u32,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BehaviorTuple<O> {
    pub s: O,
    pub a: u8,
}

/// `k` items drawn uniformly with replacement.
pub fn sample_batch<'a, T>(items: &'a [T], k: usize, rng: &mut impl Rng) -> Result<Vec<&'a T>> {
    if items.is_empty() {
        return Err(Error::EmptyBuffer);
    }
    Ok((0..k).map(|_| &items[rng.random_range(0..items.len())]).collect())
}

/// Fixed-capacity FIFO store; once full each push evicts the oldest item.
#[derive(Clone, Debug)]
pub struct CircularBuffer<T> {
    capacity: usize,
    items: Vec<T>,
    next: usize,
    inserts: u64,
}

impl<T> CircularBuffer<T> {
    pub fn new(capacity: usize) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::InvalidConfig("buffer capacity must be positive".into()));
        }
        Ok(CircularBuffer {
            capacity,
            items: Vec::new(),
            next: 0,
            inserts: 0,
        })
    }

    pub fn push(&mut self, item: T) {
        if self.items.len() < self.capacity {
            self.items.push(item);
        } else {
            self.items[self.next] = item;
        }
        self.next = (self.next + 1) % self.capacity;
        self.inserts += 1;
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Total pushes, including evicted items.
    pub fn inserts(&self) -> u64 {
        self.inserts
    }

    /// Contents from oldest to newest.
    pub fn iter(&self) -> impl Iterator<Item = &T> {
        let split = if self.items.len() < self.capacity { 0 } else { self.next };
        self.items[split..].iter().chain(&self.items[..split])
    }

    pub fn sample(&self, k: usize, rng: &mut impl Rng) -> Result<Vec<&T>> {
        sample_batch(&self.items, k, rng)
    }
}

/// Uniform fixed-size sample of an unbounded stream (Algorithm R).
#[derive(Clone, Debug)]
pub struct ReservoirBuffer<T> {
    capacity: usize,
    items: Vec<T>,
    inserts: u64,
    rng: ChaCha8Rng,
}

impl<T> ReservoirBuffer<T> {
    pub fn new(capacity: usize, seed: u64) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::InvalidConfig("buffer capacity must be positive".into()));
        }
        Ok(ReservoirBuffer {
            capacity,
            items: Vec::new(),
            inserts: 0,
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    /// Appends while filling; afterwards the `n`-th item replaces a uniform
    /// slot with probability `capacity / n`.
    pub fn insert(&mut self, item: T) {
        self.inserts += 1;
        if self.items.len() < self.capacity {
            self.items.push(item);
            return;
        }
        let j = self.rng.random_range(0..self.inserts);
        if (j as usize) < self.capacity {
            self.items[j as usize] = item;
        }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn inserts(&self) -> u64 {
        self.inserts
    }

    pub fn items(&self) -> &[T] {
        &self.items
    }

    pub fn sample(&self, k: usize, rng: &mut impl Rng) -> Result<Vec<&T>> {
        sample_batch(&self.items, k, rng)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circular_evicts_oldest() {
        let mut b = CircularBuffer::new(3).unwrap();
        for i in 0..4 {
            b.push(i);
        }
        assert_eq!(b.iter().copied().collect::<Vec<_>>(), vec![1, 2, 3]);
        assert_eq!(b.inserts(), 4);
        let mut small = CircularBuffer::new(5).unwrap();
        small.push('a');
        small.push('b');
        assert_eq!(small.iter().copied().collect::<String>(), "ab");
        assert!(CircularBuffer::<u8>::new(0).is_err());
    }

    #[test]
    fn reservoir_fill_and_determinism() {
        let mut r = ReservoirBuffer::new(5, 1).unwrap();
        for i in 0..5 {
            r.insert(i);
        }
        assert_eq!(r.items(), &[0, 1, 2, 3, 4]);
        let run = |seed| {
            let mut r = ReservoirBuffer::new(10, seed).unwrap();
            (0..1000).for_each(|i| r.insert(i));
            r.items().to_vec()
        };
        assert_eq!(run(7), run(7));
        assert_ne!(run(7), run(8));
    }

    #[test]
    fn sampling() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(sample_batch(&[42], 4, &mut rng).unwrap(), vec![&42; 4]);
        assert!(sample_batch(&[1], 0, &mut rng).unwrap().is_empty());
        assert!(matches!(sample_batch::<u8>(&[], 1, &mut rng), Err(Error::EmptyBuffer)));
    }
}
