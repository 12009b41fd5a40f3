//! ExStream: merge the two closest prototypes to make room for the new sample.

use super::Prototype;
use crate::data::sq_dist;

/// A class buffer of at most `capacity` weighted prototypes.
///
/// Pairwise squared distances between stored prototypes are cached so a full
/// insert costs `O(b·d + b²)` instead of `O(b²·d)`; the search over pairs is
/// still exact.
#[derive(Debug, Clone)]
pub struct ExStreamBuffer {
    capacity: usize,
    prototypes: Vec<Prototype>,
    // row-major capacity x capacity, entries (i, j) with i < j valid
    pair_dist: Vec<f64>,
}

impl ExStreamBuffer {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity >= 1);
        Self {
            capacity,
            prototypes: Vec::with_capacity(capacity),
            pair_dist: vec![0.0; capacity * capacity],
        }
    }

    /// Builds a buffer holding `prototypes` (at most `capacity` of them).
    pub fn from_prototypes(capacity: usize, prototypes: Vec<Prototype>) -> Self {
        assert!(prototypes.len() <= capacity);
        let mut buf = Self::new(capacity);
        for p in prototypes {
            buf.prototypes.push(p);
            buf.refresh_distances(buf.prototypes.len() - 1);
        }
        buf
    }

    pub fn capacity(&self) -> usize {
        self.capacity
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

    fn refresh_distances(&mut self, slot: usize) {
        let b = self.capacity;
        for other in 0..self.prototypes.len() {
            if other == slot {
                continue;
            }
            let d = sq_dist(
                &self.prototypes[slot].vector,
                &self.prototypes[other].vector,
            );
            let (i, j) = if slot < other {
                (slot, other)
            } else {
                (other, slot)
            };
            self.pair_dist[i * b + j] = d;
        }
    }

    /// The closest stored pair `(i, j)`, `i < j`; ties go to the
    /// lexicographically smallest pair.
    pub fn closest_pair(&self) -> Option<(usize, usize)> {
        let n = self.prototypes.len();
        let b = self.capacity;
        let mut best: Option<(usize, usize, f64)> = None;
        for i in 0..n {
            for j in i + 1..n {
                let d = self.pair_dist[i * b + j];
                if best.is_none_or(|(_, _, bd)| d < bd) {
                    best = Some((i, j, d));
                }
            }
        }
        best.map(|(i, j, _)| (i, j))
    }

    pub fn insert(&mut self, x: &[f64]) {
        if self.prototypes.len() < self.capacity {
            self.prototypes.push(Prototype::new(x.to_vec(), 1));
            self.refresh_distances(self.prototypes.len() - 1);
            return;
        }
        if self.capacity == 1 {
            // no pair to merge: fold the sample into the lone prototype
            self.prototypes[0].absorb_weighted(x, 1);
            return;
        }
        let (i, j) = self
            .closest_pair()
            .expect("full buffer holds at least two prototypes");
        let (ci, cj) = (self.prototypes[i].count, self.prototypes[j].count);
        let wj = std::mem::replace(&mut self.prototypes[j], Prototype::new(x.to_vec(), 1));
        self.prototypes[i].absorb_weighted(&wj.vector, cj);
        debug_assert_eq!(self.prototypes[i].count, ci + cj);
        self.refresh_distances(i);
        self.refresh_distances(j);
    }
}
