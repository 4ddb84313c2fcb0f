//! Fixed-capacity FIFO experience memory with uniform sampling.

use rand::Rng;
use thiserror::Error;

use crate::env::GridObservation;

pub const DEFAULT_CAPACITY: usize = 100_000;
pub const DEFAULT_BATCH_SIZE: usize = 32;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ReplayError {
    #[error("cannot sample from an empty replay memory")]
    Empty,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub state: GridObservation,
    pub action: usize,
    pub reward: f64,
    pub next_state: GridObservation,
    /// True only for environment termination, never for time-limit truncation.
    pub done: bool,
}

#[derive(Debug, Clone)]
pub struct ReplayMemory {
    capacity: usize,
    buf: Vec<Transition>,
    cursor: usize,
}

impl ReplayMemory {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "replay capacity must be positive");
        Self { capacity, buf: Vec::with_capacity(capacity.min(1 << 16)), cursor: 0 }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.buf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.buf.is_empty()
    }

    /// Stores `t`, returning the evicted transition once the ring is full.
    pub fn push(&mut self, t: Transition) -> Option<Transition> {
        if self.buf.len() < self.capacity {
            self.buf.push(t);
            None
        } else {
            let old = std::mem::replace(&mut self.buf[self.cursor], t);
            self.cursor = (self.cursor + 1) % self.capacity;
            Some(old)
        }
    }

    /// Uniform draws with replacement.
    pub fn sample<R: Rng + ?Sized>(&self, batch_size: usize, rng: &mut R) -> Result<Vec<&Transition>, ReplayError> {
        if self.buf.is_empty() {
            return Err(ReplayError::Empty);
        }
        Ok((0..batch_size).map(|_| &self.buf[rng.random_range(0..self.buf.len())]).collect())
    }

    /// Sampled slot indices, exposed for uniformity checks.
    pub fn sample_indices<R: Rng + ?Sized>(&self, batch_size: usize, rng: &mut R) -> Result<Vec<usize>, ReplayError> {
        if self.buf.is_empty() {
            return Err(ReplayError::Empty);
        }
        Ok((0..batch_size).map(|_| rng.random_range(0..self.buf.len())).collect())
    }

    /// Resident transitions, oldest first.
    pub fn iter(&self) -> impl Iterator<Item = &Transition> {
        let (newer, older) = self.buf.split_at(self.cursor);
        older.iter().chain(newer.iter())
    }
}
