use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Action;

#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub obs: Vec<f64>,
    pub action: Action,
    pub reward: f64,
    pub next_obs: Vec<f64>,
    pub terminal: bool,
}

/// Fixed-capacity ring buffer with seeded uniform sampling.
#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    capacity: usize,
    items: Vec<Transition>,
    cursor: usize,
    rng: ChaCha8Rng,
}

impl ReplayBuffer {
    pub fn new(capacity: usize, seed: u64) -> Self {
        assert!(capacity > 0);
        Self {
            capacity,
            items: Vec::with_capacity(capacity.min(1 << 16)),
            cursor: 0,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn push(&mut self, t: Transition) {
        if self.items.len() < self.capacity {
            self.items.push(t);
        } else {
            self.items[self.cursor] = t;
        }
        self.cursor = (self.cursor + 1) % self.capacity;
    }

    /// Uniform indices with replacement.
    pub fn sample_indices(&mut self, batch: usize) -> Vec<usize> {
        assert!(!self.items.is_empty(), "cannot sample an empty buffer");
        let n = self.items.len();
        (0..batch).map(|_| self.rng.random_range(0..n)).collect()
    }

    pub fn sample(&mut self, batch: usize) -> Vec<&Transition> {
        let idx = self.sample_indices(batch);
        idx.into_iter().map(|i| &self.items[i]).collect()
    }
}
