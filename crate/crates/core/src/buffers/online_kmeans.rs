//! Online k-means: fold the new sample into its nearest exemplar.

use super::{nearest_index, Prototype};

#[derive(Debug, Clone)]
pub struct OnlineKMeansBuffer {
    capacity: usize,
    prototypes: Vec<Prototype>,
}

impl OnlineKMeansBuffer {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity >= 1);
        Self {
            capacity,
            prototypes: Vec::with_capacity(capacity),
        }
    }

    pub fn from_prototypes(capacity: usize, prototypes: Vec<Prototype>) -> Self {
        assert!(prototypes.len() <= capacity);
        Self {
            capacity,
            prototypes,
        }
    }

    pub fn prototypes(&self) -> &[Prototype] {
        &self.prototypes
    }

    pub fn len(&self) -> usize {
        self.prototypes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prototypes.is_empty()
    }

    pub fn insert(&mut self, x: &[f64]) {
        if self.prototypes.len() < self.capacity {
            self.prototypes.push(Prototype::new(x.to_vec(), 1));
            return;
        }
        let i = nearest_index(x, self.prototypes.iter().map(|p| p.vector.as_slice()))
            .expect("full buffer is non-empty");
        self.prototypes[i].absorb_weighted(x, 1);
    }
}
