//! Samples, datasets, on-disk formats and stream orderings.

mod features;
mod manifest;
mod ordering;
mod synth;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use features::{load_feature_matrix, FeatureMatrix};
pub use manifest::{dataset_to_files, load_manifest, write_manifest, ManifestRow};
pub use ordering::{order_stream, OrderingKind, StreamOrdering};
pub use synth::{synth_gaussian, SynthSpec};

/// A dense feature vector. Entries are finite within a validated dataset.
pub type FeatureVector = Vec<f64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Split::Train => "train",
            Split::Test => "test",
        })
    }
}

impl FromStr for Split {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Split::Train),
            "test" => Ok(Split::Test),
            other => Err(Error::Manifest(format!(
                "split must be `train` or `test`, got `{other}`"
            ))),
        }
    }
}

/// One stream element: a feature vector, its class, and where it sits in its
/// source clip.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSample {
    pub features: FeatureVector,
    pub class_label: usize,
    pub instance_id: u64,
    /// Temporal position within the instance clip.
    pub frame_index: u64,
    pub split: Split,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub name: String,
    pub num_classes: usize,
    pub dim: usize,
    pub train: Vec<LabeledSample>,
    pub test: Vec<LabeledSample>,
}

impl Dataset {
    /// Checks the structural invariants: shared width, finite entries, labels
    /// below `num_classes`, unique `(class, instance, frame)` keys per split,
    /// and every test class present in train.
    pub fn validate(&self) -> Result<()> {
        let mut train_classes = vec![false; self.num_classes];
        for (split, samples) in [(Split::Train, &self.train), (Split::Test, &self.test)] {
            let mut keys = std::collections::HashSet::with_capacity(samples.len());
            for (i, s) in samples.iter().enumerate() {
                if s.features.len() != self.dim {
                    return Err(Error::Data(format!(
                        "{split} sample {i} has width {}, expected {}",
                        s.features.len(),
                        self.dim
                    )));
                }
                if s.features.iter().any(|v| !v.is_finite()) {
                    return Err(Error::Data(format!("{split} sample {i} is not finite")));
                }
                if s.class_label >= self.num_classes {
                    return Err(Error::Data(format!(
                        "{split} sample {i} has label {} >= {}",
                        s.class_label, self.num_classes
                    )));
                }
                if !keys.insert((s.class_label, s.instance_id, s.frame_index)) {
                    return Err(Error::Data(format!(
                        "duplicate (class {}, instance {}, frame {}) in {split} split",
                        s.class_label, s.instance_id, s.frame_index
                    )));
                }
                if split == Split::Train {
                    train_classes[s.class_label] = true;
                }
            }
        }
        if let Some(s) = self.test.iter().find(|s| !train_classes[s.class_label]) {
            return Err(Error::Data(format!(
                "class {} appears in test but not in train",
                s.class_label
            )));
        }
        Ok(())
    }

    /// Returns a copy with every feature vector scaled to unit length.
    pub fn l2_normalized(mut self) -> Self {
        for s in self.train.iter_mut().chain(self.test.iter_mut()) {
            l2_normalize_in_place(&mut s.features);
        }
        self
    }
}

const NORM_FLOOR: f64 = 1e-12;

/// Scales `v` to unit Euclidean norm. Vectors with norm below 1e-12 pass
/// through unchanged.
pub fn l2_normalize(v: &[f64]) -> FeatureVector {
    let mut out = v.to_vec();
    l2_normalize_in_place(&mut out);
    out
}

pub fn l2_normalize_in_place(v: &mut [f64]) {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm >= NORM_FLOOR {
        v.iter_mut().for_each(|x| *x /= norm);
    }
}

/// Squared Euclidean distance.
#[inline]
pub fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}
