use crate::engine::NUM_PLAYERS;

/// Winnings of each player in one game, in mbb/h.
pub fn game_mbb(chips: [i64; NUM_PLAYERS], hands: u64, big_blind: f64) -> [f64; NUM_PLAYERS] {
    if hands == 0 {
        return [0.0; NUM_PLAYERS];
    }
    chips.map(|c| 1000.0 * c as f64 / (big_blind * hands as f64))
}

/// Absolute difference between the two players' mean per-game mbb/h over
/// consecutive windows of games.
#[derive(Clone, Debug, PartialEq)]
pub struct NashGapTracker {
    window: usize,
    sums: [f64; NUM_PLAYERS],
    count: usize,
    series: Vec<f64>,
}

impl NashGapTracker {
    pub fn new(window: usize) -> Self {
        assert!(window > 0, "window must be positive");
        NashGapTracker {
            window,
            sums: [0.0; NUM_PLAYERS],
            count: 0,
            series: Vec::new(),
        }
    }

    pub fn window(&self) -> usize {
        self.window
    }

    /// Adds one game; returns the gap when the game completes a window.
    pub fn record(&mut self, mbb: [f64; NUM_PLAYERS]) -> Option<f64> {
        self.sums[0] += mbb[0];
        self.sums[1] += mbb[1];
        self.count += 1;
        if self.count < self.window {
            return None;
        }
        let n = self.count as f64;
        let gap = (self.sums[0] / n - self.sums[1] / n).abs();
        self.series.push(gap);
        self.sums = [0.0; NUM_PLAYERS];
        self.count = 0;
        Some(gap)
    }

    /// Games recorded in the unfinished window.
    pub fn pending(&self) -> usize {
        self.count
    }

    pub fn series(&self) -> &[f64] {
        &self.series
    }
}
