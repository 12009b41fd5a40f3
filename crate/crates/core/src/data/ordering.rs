//! The four stream orderings.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::error::{Error, Result};
use crate::rng::{self, stream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrderingKind {
    /// Uniform shuffle of the whole training set.
    Iid,
    /// Classes one after another in a random class order; shuffled within a class.
    ClassIid,
    /// Instance clips in random order, frames of a clip contiguous and in
    /// temporal order. Clips of different classes interleave.
    Instance,
    /// Classes one after another; within a class, its clips in random order.
    ClassInstance,
}

impl OrderingKind {
    pub const ALL: [OrderingKind; 4] = [
        OrderingKind::Iid,
        OrderingKind::ClassIid,
        OrderingKind::Instance,
        OrderingKind::ClassInstance,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            OrderingKind::Iid => "iid",
            OrderingKind::ClassIid => "class_iid",
            OrderingKind::Instance => "instance",
            OrderingKind::ClassInstance => "class_instance",
        }
    }
}

impl fmt::Display for OrderingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for OrderingKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        OrderingKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown ordering `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StreamOrdering {
    pub kind: OrderingKind,
    pub seed: u64,
}

impl StreamOrdering {
    pub fn new(kind: OrderingKind, seed: u64) -> Self {
        Self { kind, seed }
    }
}

/// Returns a permutation of `0..dataset.train.len()` giving the order in which
/// training samples are streamed.
pub fn order_stream(dataset: &Dataset, ordering: StreamOrdering) -> Result<Vec<usize>> {
    let train = &dataset.train;
    if train.is_empty() {
        return Err(Error::Usage("cannot order an empty training set".into()));
    }
    let mut rng = rng::seeded(ordering.seed, stream::ORDERING);

    // (class, instance) -> indices sorted by frame
    let clips = || {
        let mut clips: BTreeMap<(usize, u64), Vec<usize>> = BTreeMap::new();
        for (i, s) in train.iter().enumerate() {
            clips
                .entry((s.class_label, s.instance_id))
                .or_default()
                .push(i);
        }
        for idx in clips.values_mut() {
            idx.sort_by_key(|&i| (train[i].frame_index, i));
        }
        clips
    };

    let order = match ordering.kind {
        OrderingKind::Iid => {
            let mut order: Vec<usize> = (0..train.len()).collect();
            order.shuffle(&mut rng);
            order
        }
        OrderingKind::ClassIid => {
            let mut by_class: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
            for (i, s) in train.iter().enumerate() {
                by_class.entry(s.class_label).or_default().push(i);
            }
            let mut groups: Vec<Vec<usize>> = by_class.into_values().collect();
            groups.shuffle(&mut rng);
            for g in &mut groups {
                g.shuffle(&mut rng);
            }
            groups.concat()
        }
        OrderingKind::Instance => {
            let mut groups: Vec<Vec<usize>> = clips().into_values().collect();
            groups.shuffle(&mut rng);
            groups.concat()
        }
        OrderingKind::ClassInstance => {
            let mut by_class: BTreeMap<usize, Vec<Vec<usize>>> = BTreeMap::new();
            for ((class, _), idx) in clips() {
                by_class.entry(class).or_default().push(idx);
            }
            let mut classes: Vec<Vec<Vec<usize>>> = by_class.into_values().collect();
            classes.shuffle(&mut rng);
            for c in &mut classes {
                c.shuffle(&mut rng);
            }
            classes.into_iter().flatten().flatten().collect()
        }
    };
    Ok(order)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{LabeledSample, Split};

    /// 3 classes x 3 instances x 4 frames, frames stored out of order.
    fn clip_dataset() -> Dataset {
        let mut train = Vec::new();
        for class in 0..3 {
            for inst in 0..3u64 {
                for frame in [2u64, 0, 3, 1] {
                    train.push(LabeledSample {
                        features: vec![class as f64, inst as f64, frame as f64],
                        class_label: class,
                        instance_id: class as u64 * 10 + inst,
                        frame_index: frame,
                        split: Split::Train,
                    });
                }
            }
        }
        Dataset {
            name: "clips".into(),
            num_classes: 3,
            dim: 3,
            train,
            test: vec![],
        }
    }

    fn is_permutation(order: &[usize], n: usize) -> bool {
        let mut sorted = order.to_vec();
        sorted.sort_unstable();
        sorted == (0..n).collect::<Vec<_>>()
    }

    fn label_runs(ds: &Dataset, order: &[usize]) -> usize {
        let labels: Vec<usize> = order.iter().map(|&i| ds.train[i].class_label).collect();
        1 + labels.windows(2).filter(|w| w[0] != w[1]).count()
    }

    #[test]
    fn every_kind_is_a_permutation_and_deterministic() {
        let ds = clip_dataset();
        for kind in OrderingKind::ALL {
            for seed in 0..5 {
                let a = order_stream(&ds, StreamOrdering::new(kind, seed)).unwrap();
                let b = order_stream(&ds, StreamOrdering::new(kind, seed)).unwrap();
                assert!(is_permutation(&a, ds.train.len()));
                assert_eq!(a, b);
            }
        }
    }

    #[test]
    fn class_orderings_form_constant_runs() {
        let ds = clip_dataset();
        for kind in [OrderingKind::ClassIid, OrderingKind::ClassInstance] {
            for seed in 0..10 {
                let order = order_stream(&ds, StreamOrdering::new(kind, seed)).unwrap();
                assert_eq!(label_runs(&ds, &order), 3, "{kind} seed {seed}");
            }
        }
    }

    #[test]
    fn instance_orderings_keep_frames_sorted_and_contiguous() {
        let ds = clip_dataset();
        for kind in [OrderingKind::Instance, OrderingKind::ClassInstance] {
            for seed in 0..10 {
                let order = order_stream(&ds, StreamOrdering::new(kind, seed)).unwrap();
                for chunk in order.chunks(4) {
                    let inst = ds.train[chunk[0]].instance_id;
                    let frames: Vec<u64> = chunk
                        .iter()
                        .inspect(|&&i| assert_eq!(ds.train[i].instance_id, inst))
                        .map(|&i| ds.train[i].frame_index)
                        .collect();
                    assert_eq!(frames, vec![0, 1, 2, 3]);
                }
            }
        }
    }

    #[test]
    fn instance_ordering_interleaves_classes_for_some_seed() {
        let ds = clip_dataset();
        let interleaved = (0..20).any(|seed| {
            let order =
                order_stream(&ds, StreamOrdering::new(OrderingKind::Instance, seed)).unwrap();
            label_runs(&ds, &order) > 3
        });
        assert!(interleaved);
    }

    #[test]
    fn iid_seeds_differ() {
        let mut ds = clip_dataset();
        ds.train.truncate(10);
        let differ = (0..100u64)
            .filter(|&s| {
                let a = order_stream(&ds, StreamOrdering::new(OrderingKind::Iid, 2 * s)).unwrap();
                let b =
                    order_stream(&ds, StreamOrdering::new(OrderingKind::Iid, 2 * s + 1)).unwrap();
                a != b
            })
            .count();
        assert!(differ >= 99, "{differ}/100 pairs differ");
    }

    #[test]
    fn unknown_kind_and_empty_set() {
        assert!(matches!(
            "shuffled".parse::<OrderingKind>(),
            Err(Error::Config(_))
        ));
        let mut ds = clip_dataset();
        ds.train.clear();
        assert!(order_stream(&ds, StreamOrdering::new(OrderingKind::Iid, 0)).is_err());
    }
}
