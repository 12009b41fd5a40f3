//! First-in, first-out replacement.

use std::collections::VecDeque;

#[derive(Debug, Clone)]
pub struct QueueBuffer {
    capacity: usize,
    items: VecDeque<Vec<f64>>,
}

impl QueueBuffer {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity >= 1);
        Self {
            capacity,
            items: VecDeque::with_capacity(capacity),
        }
    }

    /// Stored samples, oldest first.
    pub fn items(&self) -> impl ExactSizeIterator<Item = &Vec<f64>> {
        self.items.iter()
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn insert(&mut self, x: &[f64]) {
        if self.items.len() == self.capacity {
            self.items.pop_front();
        }
        self.items.push_back(x.to_vec());
    }
}
