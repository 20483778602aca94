//! Adaptive windowing over an exponential histogram.
//!
//! The window is stored as buckets of `2^level` consecutive values, at most
//! [`MAX_BUCKETS_PER_LEVEL`] per level, so memory is logarithmic in the window
//! length. Bucket sums are exact; compression only limits where the window
//! can be cut, never the accuracy of the window mean.

use std::collections::VecDeque;

use crate::error::{check_non_negative, Error, Result};

pub const MAX_BUCKETS_PER_LEVEL: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bucket {
    pub total: f64,
    pub count: u64,
}

/// Finds the first admissible split (scanning from the oldest data) whose
/// sub-window means differ by at least `sqrt(ln(4 / delta') / (2 m))`, with
/// `m = 1 / (1/n0 + 1/n1)` and `delta' = delta / n`.
///
/// `buckets` must be ordered oldest first. Returns how many of the oldest
/// buckets form the sub-window that should be dropped.
pub fn adwin_cut_test(buckets: &[Bucket], delta: f64) -> Option<usize> {
    if buckets.len() < 2 {
        return None;
    }
    let n: u64 = buckets.iter().map(|b| b.count).sum();
    let total: f64 = buckets.iter().map(|b| b.total).sum();
    let log_term = (4.0 * n as f64 / delta).ln();

    let (mut n0, mut s0) = (0u64, 0.0f64);
    for (i, b) in buckets[..buckets.len() - 1].iter().enumerate() {
        n0 += b.count;
        s0 += b.total;
        let n1 = n - n0;
        let mean0 = s0 / n0 as f64;
        let mean1 = (total - s0) / n1 as f64;
        let m = 1.0 / (1.0 / n0 as f64 + 1.0 / n1 as f64);
        let eps_cut = (log_term / (2.0 * m)).sqrt();
        if (mean0 - mean1).abs() >= eps_cut {
            return Some(i + 1);
        }
    }
    None
}

#[derive(Debug, Clone)]
pub struct Adwin {
    delta: f64,
    /// `levels[i]` holds buckets of size `2^i`, oldest at the front. Every
    /// value in level `i + 1` is older than every value in level `i`.
    levels: Vec<VecDeque<Bucket>>,
    total: f64,
    count: u64,
    cuts: u64,
}

impl Adwin {
    pub fn new(delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::invalid(format!("ADWIN delta must lie in (0, 1), got {delta}")));
        }
        Ok(Self {
            delta,
            levels: Vec::new(),
            total: 0.0,
            count: 0,
            cuts: 0,
        })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn width(&self) -> u64 {
        self.count
    }

    pub fn cuts(&self) -> u64 {
        self.cuts
    }

    pub fn bucket_count(&self) -> usize {
        self.levels.iter().map(VecDeque::len).sum()
    }

    pub fn mean(&self) -> Option<f64> {
        (self.count > 0).then(|| self.total / self.count as f64)
    }

    /// Buckets ordered oldest first.
    pub fn buckets(&self) -> Vec<Bucket> {
        self.levels
            .iter()
            .rev()
            .flat_map(|level| level.iter().copied())
            .collect()
    }

    pub fn update(&mut self, value: f64) -> Result<f64> {
        check_non_negative("loss", value)?;
        self.insert(value);
        while let Some(k) = adwin_cut_test(&self.buckets(), self.delta) {
            self.drop_oldest(k);
            self.cuts += 1;
        }
        Ok(self.total / self.count as f64)
    }

    fn insert(&mut self, value: f64) {
        if self.levels.is_empty() {
            self.levels.push(VecDeque::new());
        }
        self.levels[0].push_back(Bucket {
            total: value,
            count: 1,
        });
        self.total += value;
        self.count += 1;

        let mut level = 0;
        while self.levels[level].len() > MAX_BUCKETS_PER_LEVEL {
            let a = self.levels[level].pop_front().expect("level has buckets");
            let b = self.levels[level].pop_front().expect("level has buckets");
            if level + 1 == self.levels.len() {
                self.levels.push(VecDeque::new());
            }
            self.levels[level + 1].push_back(Bucket {
                total: a.total + b.total,
                count: a.count + b.count,
            });
            level += 1;
        }
    }

    fn drop_oldest(&mut self, mut k: usize) {
        while k > 0 {
            let Some(level) = self.levels.iter_mut().rev().find(|l| !l.is_empty()) else {
                break;
            };
            let b = level.pop_front().expect("non-empty level");
            self.total -= b.total;
            self.count -= b.count;
            k -= 1;
        }
        while self.levels.last().is_some_and(VecDeque::is_empty) {
            self.levels.pop();
        }
        // re-sum to keep the running total free of cancellation error
        self.total = self.levels.iter().flatten().map(|b| b.total).sum();
    }
}
