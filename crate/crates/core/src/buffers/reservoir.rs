//! Reservoir sampling (Algorithm R): after `M` inserts every sample is stored
//! with probability `b / M`.

use rand::Rng;

#[derive(Debug, Clone)]
pub struct ReservoirState {
    capacity: usize,
    samples: Vec<Vec<f64>>,
    seen: u64,
}

impl ReservoirState {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity >= 1);
        Self {
            capacity,
            samples: Vec::with_capacity(capacity),
            seen: 0,
        }
    }

    pub fn samples(&self) -> &[Vec<f64>] {
        &self.samples
    }

    /// Total inserts so far (`M`).
    pub fn seen(&self) -> u64 {
        self.seen
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Once full, the `M`-th insert replaces a uniformly chosen slot with
    /// probability `b / M` and is discarded otherwise.
    pub fn insert<R: Rng + ?Sized>(&mut self, x: &[f64], rng: &mut R) {
        self.seen += 1;
        if self.samples.len() < self.capacity {
            self.samples.push(x.to_vec());
            return;
        }
        let slot = rng.random_range(0..self.seen);
        if slot < self.capacity as u64 {
            self.samples[slot as usize] = x.to_vec();
        }
    }
}
