//! Per-class prototype buffers.
//!
//! A [`BufferManager`] owns one buffer per class label, all using the same
//! [`Strategy`]. Bounded strategies hold at most `b` prototypes per class;
//! `Full` keeps every sample.

mod clustream;
mod exstream;
mod hpstream;
mod kmeans;
mod online_kmeans;
mod queue;
mod reservoir;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::data::{sq_dist, FeatureVector};
use crate::error::{Error, Result};
use crate::rng::{self, stream, Rng};

pub use clustream::{CluStreamBuffer, CluStreamOutcome, CluStreamParams, MicroCluster};
pub use exstream::ExStreamBuffer;
pub use hpstream::{
    fade_factor, select_dimensions, FadedCluster, HpStreamBuffer, HpStreamOutcome, HpStreamParams,
};
pub use kmeans::{kmeans, KMeans};
pub use online_kmeans::OnlineKMeansBuffer;
pub use queue::QueueBuffer;
pub use reservoir::ReservoirState;

/// A stored representative and the number of points it stands for.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prototype {
    pub vector: FeatureVector,
    pub count: u64,
}

impl Prototype {
    pub fn new(vector: FeatureVector, count: u64) -> Self {
        debug_assert!(count >= 1);
        Self { vector, count }
    }

    /// Count-weighted average with `other` carrying weight `count`:
    /// `w ← (c·w + count·other) / (c + count)`, `c ← c + count`.
    pub fn absorb_weighted(&mut self, other: &[f64], count: u64) {
        let (ca, cb) = (self.count as f64, count as f64);
        let total = ca + cb;
        for (w, o) in self.vector.iter_mut().zip(other) {
            *w += (o - *w) * cb / total;
        }
        self.count += count;
    }
}

/// Index of the point nearest to `x` in Euclidean distance; ties go to the
/// lowest index.
pub(crate) fn nearest_index<'a>(
    x: &[f64],
    points: impl Iterator<Item = &'a [f64]>,
) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, p) in points.enumerate() {
        let d = sq_dist(x, p);
        if best.is_none_or(|(_, bd)| d < bd) {
            best = Some((i, d));
        }
    }
    best.map(|(i, _)| i)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Strategy {
    ExStream,
    OnlineKMeans,
    CluStream,
    /// `projected_dims = None` selects half the feature dimension.
    HpStream {
        projected_dims: Option<usize>,
    },
    Reservoir,
    Queue,
    /// Unbounded: keeps every sample.
    Full,
}

impl Strategy {
    pub const BOUNDED: [Strategy; 6] = [
        Strategy::ExStream,
        Strategy::OnlineKMeans,
        Strategy::CluStream,
        Strategy::HpStream {
            projected_dims: None,
        },
        Strategy::Reservoir,
        Strategy::Queue,
    ];

    pub fn is_bounded(self) -> bool {
        self != Strategy::Full
    }

    /// Stored units per cluster: micro-cluster structures keep both a linear
    /// and a squared sum.
    pub fn units_per_prototype(self) -> f64 {
        match self {
            Strategy::CluStream | Strategy::HpStream { .. } => 2.0,
            _ => 1.0,
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Strategy::ExStream => f.write_str("exstream"),
            Strategy::OnlineKMeans => f.write_str("online_kmeans"),
            Strategy::CluStream => f.write_str("clustream"),
            Strategy::HpStream {
                projected_dims: None,
            } => f.write_str("hpstream"),
            Strategy::HpStream {
                projected_dims: Some(l),
            } => write!(f, "hpstream:{l}"),
            Strategy::Reservoir => f.write_str("reservoir"),
            Strategy::Queue => f.write_str("queue"),
            Strategy::Full => f.write_str("full"),
        }
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "exstream" => Strategy::ExStream,
            "online_kmeans" => Strategy::OnlineKMeans,
            "clustream" => Strategy::CluStream,
            "hpstream" => Strategy::HpStream {
                projected_dims: None,
            },
            "reservoir" => Strategy::Reservoir,
            "queue" => Strategy::Queue,
            "full" => Strategy::Full,
            other => match other.strip_prefix("hpstream:").map(str::parse::<usize>) {
                Some(Ok(l)) if l >= 1 => Strategy::HpStream {
                    projected_dims: Some(l),
                },
                _ => return Err(Error::Config(format!("unknown buffer strategy `{other}`"))),
            },
        })
    }
}

/// One class's store.
#[derive(Debug, Clone)]
pub enum ClassBuffer {
    ExStream(ExStreamBuffer),
    OnlineKMeans(OnlineKMeansBuffer),
    CluStream(CluStreamBuffer),
    HpStream(HpStreamBuffer),
    Reservoir(ReservoirState),
    Queue(QueueBuffer),
    Full(Vec<FeatureVector>),
}

impl ClassBuffer {
    pub fn len(&self) -> usize {
        match self {
            ClassBuffer::ExStream(b) => b.len(),
            ClassBuffer::OnlineKMeans(b) => b.len(),
            ClassBuffer::CluStream(b) => b.len(),
            ClassBuffer::HpStream(b) => b.len(),
            ClassBuffer::Reservoir(b) => b.len(),
            ClassBuffer::Queue(b) => b.len(),
            ClassBuffer::Full(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Stored prototypes in slot order. Micro-cluster strategies report their
    /// centroids; HPStream counts are the decayed weight rounded up.
    pub fn prototypes(&self) -> Vec<Prototype> {
        let raw = |v: &FeatureVector| Prototype::new(v.clone(), 1);
        match self {
            ClassBuffer::ExStream(b) => b.prototypes().to_vec(),
            ClassBuffer::OnlineKMeans(b) => b.prototypes().to_vec(),
            ClassBuffer::CluStream(b) if !b.is_initialized() => b.staged().map(raw).collect(),
            ClassBuffer::CluStream(b) => b
                .clusters()
                .iter()
                .map(|c| Prototype::new(c.centroid(), c.n))
                .collect(),
            ClassBuffer::HpStream(b) => b
                .clusters()
                .iter()
                .map(|c| Prototype::new(c.centroid(), c.weight.ceil().max(1.0) as u64))
                .collect(),
            ClassBuffer::Reservoir(b) => b.samples().iter().map(raw).collect(),
            ClassBuffer::Queue(b) => b.items().map(raw).collect(),
            ClassBuffer::Full(v) => v.iter().map(raw).collect(),
        }
    }

    /// Stored d-vector equivalents. Raw samples staged by CluStream count one
    /// unit each.
    pub fn memory_cost(&self) -> f64 {
        match self {
            ClassBuffer::CluStream(b) if !b.is_initialized() => b.len() as f64,
            ClassBuffer::CluStream(b) => 2.0 * b.len() as f64,
            ClassBuffer::HpStream(b) => 2.0 * b.len() as f64,
            other => other.len() as f64,
        }
    }
}

/// One buffer per class, all with the same strategy and capacity.
#[derive(Debug, Clone)]
pub struct BufferManager {
    strategy: Strategy,
    capacity: usize,
    buffers: Vec<ClassBuffer>,
    rngs: Vec<Rng>,
    inserted: Vec<u64>,
}

impl BufferManager {
    /// `capacity` is ignored for [`Strategy::Full`]. `seed` drives reservoir
    /// replacement and CluStream's k-means start, one stream per class.
    pub fn new(
        strategy: Strategy,
        capacity: usize,
        num_classes: usize,
        dim: usize,
        seed: u64,
    ) -> Result<Self> {
        if strategy.is_bounded() && capacity == 0 {
            return Err(Error::Config(format!(
                "{strategy} needs a buffer size of at least 1"
            )));
        }
        let hp_params = match strategy {
            Strategy::HpStream { projected_dims } => {
                let l = projected_dims.unwrap_or(dim.div_ceil(2)).max(1);
                if l > dim {
                    return Err(Error::Config(format!(
                        "hpstream projects onto {l} dimensions but features have {dim}"
                    )));
                }
                Some(HpStreamParams::with_dims(l))
            }
            _ => None,
        };
        let make = || match strategy {
            Strategy::ExStream => ClassBuffer::ExStream(ExStreamBuffer::new(capacity)),
            Strategy::OnlineKMeans => ClassBuffer::OnlineKMeans(OnlineKMeansBuffer::new(capacity)),
            Strategy::CluStream => {
                ClassBuffer::CluStream(CluStreamBuffer::new(capacity, CluStreamParams::default()))
            }
            Strategy::HpStream { .. } => {
                ClassBuffer::HpStream(HpStreamBuffer::new(capacity, hp_params.unwrap()))
            }
            Strategy::Reservoir => ClassBuffer::Reservoir(ReservoirState::new(capacity)),
            Strategy::Queue => ClassBuffer::Queue(QueueBuffer::new(capacity)),
            Strategy::Full => ClassBuffer::Full(Vec::new()),
        };
        Ok(Self {
            strategy,
            capacity,
            buffers: (0..num_classes).map(|_| make()).collect(),
            rngs: (0..num_classes)
                .map(|c| rng::seeded_sub(seed, stream::BUFFER, c as u64))
                .collect(),
            inserted: vec![0; num_classes],
        })
    }

    pub fn strategy(&self) -> Strategy {
        self.strategy
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn num_classes(&self) -> usize {
        self.buffers.len()
    }

    pub fn class_buffer(&self, class: usize) -> &ClassBuffer {
        &self.buffers[class]
    }

    /// Samples routed to `class` so far.
    pub fn inserted(&self, class: usize) -> u64 {
        self.inserted[class]
    }

    /// Routes `x` to the buffer of `class`. `t` is the 1-based position of the
    /// sample in the stream.
    pub fn insert(&mut self, x: &[f64], class: usize, t: u64) -> Result<()> {
        let k = self.buffers.len();
        let buf = self
            .buffers
            .get_mut(class)
            .ok_or_else(|| Error::Usage(format!("class {class} out of range for {k} buffers")))?;
        let rng = &mut self.rngs[class];
        match buf {
            ClassBuffer::ExStream(b) => b.insert(x),
            ClassBuffer::OnlineKMeans(b) => b.insert(x),
            ClassBuffer::CluStream(b) => {
                b.insert(x, t as f64, rng);
            }
            ClassBuffer::HpStream(b) => {
                b.insert(x, t);
            }
            ClassBuffer::Reservoir(b) => b.insert(x, rng),
            ClassBuffer::Queue(b) => b.insert(x),
            ClassBuffer::Full(v) => v.push(x.to_vec()),
        }
        self.inserted[class] += 1;
        Ok(())
    }

    /// Every stored prototype with its class, ordered by (class, slot).
    pub fn contents(&self) -> Vec<(FeatureVector, usize)> {
        let mut out = Vec::with_capacity(self.total_len());
        for (class, buf) in self.buffers.iter().enumerate() {
            match buf {
                ClassBuffer::Full(v) => out.extend(v.iter().map(|x| (x.clone(), class))),
                ClassBuffer::Queue(q) => out.extend(q.items().map(|x| (x.clone(), class))),
                ClassBuffer::Reservoir(r) => {
                    out.extend(r.samples().iter().map(|x| (x.clone(), class)))
                }
                other => out.extend(other.prototypes().into_iter().map(|p| (p.vector, class))),
            }
        }
        out
    }

    pub fn total_len(&self) -> usize {
        self.buffers.iter().map(ClassBuffer::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.total_len() == 0
    }

    pub fn memory_cost(&self) -> f64 {
        self.buffers.iter().map(ClassBuffer::memory_cost).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng as _;

    fn all_strategies() -> Vec<Strategy> {
        let mut v = Strategy::BOUNDED.to_vec();
        v.push(Strategy::Full);
        v
    }

    #[test]
    fn strategy_names_round_trip() {
        for s in all_strategies().into_iter().chain([Strategy::HpStream {
            projected_dims: Some(12),
        }]) {
            assert_eq!(s.to_string().parse::<Strategy>().unwrap(), s);
        }
        assert!("hpstream:0".parse::<Strategy>().is_err());
        assert!("lru".parse::<Strategy>().is_err());
    }

    #[test]
    fn first_insert_is_verbatim() {
        for s in all_strategies() {
            if s == Strategy::CluStream {
                continue;
            }
            let mut m = BufferManager::new(s, 4, 2, 3, 0).unwrap();
            m.insert(&[1.0, 2.0, 3.0], 1, 1).unwrap();
            assert_eq!(
                m.class_buffer(1).prototypes(),
                vec![Prototype::new(vec![1.0, 2.0, 3.0], 1)],
                "{s}"
            );
            assert!(m.class_buffer(0).is_empty());
        }
    }

    #[test]
    fn full_grows_without_bound() {
        let mut m = BufferManager::new(Strategy::Full, 0, 1, 1, 0).unwrap();
        for t in 1..=1000 {
            m.insert(&[t as f64], 0, t).unwrap();
            assert_eq!(m.total_len(), t as usize);
        }
    }

    #[test]
    fn bounded_strategies_cap_at_b() {
        let b = 4;
        let mut g = rng::seeded(2, 0);
        for s in Strategy::BOUNDED {
            let mut m = BufferManager::new(s, b, 1, 2, 7).unwrap();
            for t in 1..=(3 * b as u64) {
                let x = [g.random_range(-1.0..1.0), g.random_range(-1.0..1.0)];
                m.insert(&x, 0, t).unwrap();
                let limit = if s == Strategy::CluStream { 2 * b } else { b };
                assert!(m.total_len() <= limit, "{s}");
            }
            assert_eq!(m.total_len(), b, "{s}");
        }
    }

    #[test]
    fn contents_under_capacity_are_raw_samples() {
        for s in all_strategies() {
            let mut m = BufferManager::new(s, 8, 2, 1, 0).unwrap();
            let mut expected = vec![];
            for t in 1..=6u64 {
                let class = (t % 2) as usize;
                m.insert(&[t as f64], class, t).unwrap();
                expected.push((vec![t as f64], class));
            }
            expected.sort_by_key(|(v, c)| (*c, v[0] as i64));
            assert_eq!(m.contents(), expected, "{s}");
        }
    }

    #[test]
    fn clustream_contents_are_centroids() {
        let c = MicroCluster {
            n: 2,
            linear_sum: vec![2.0, 4.0],
            squared_sum: vec![2.0, 8.0],
            timestamp_sum: 3.0,
            timestamp_sq_sum: 5.0,
        };
        let buf = ClassBuffer::CluStream(CluStreamBuffer::from_clusters(
            1,
            CluStreamParams::default(),
            vec![c],
        ));
        assert_eq!(buf.prototypes(), vec![Prototype::new(vec![1.0, 2.0], 2)]);
    }

    #[test]
    fn memory_cost_accounting() {
        let fill = |s: Strategy| {
            let mut m = BufferManager::new(s, 16, 10, 4, 0).unwrap();
            let mut g = rng::seeded(4, 0);
            let mut t = 0;
            for class in 0..10 {
                for _ in 0..64 {
                    t += 1;
                    let x: Vec<f64> = (0..4).map(|_| g.random_range(0.0..1.0)).collect();
                    m.insert(&x, class, t).unwrap();
                }
            }
            m.memory_cost()
        };
        assert_eq!(fill(Strategy::ExStream), 160.0);
        assert_eq!(fill(Strategy::CluStream), 320.0);
        assert_eq!(
            fill(Strategy::HpStream {
                projected_dims: None
            }),
            320.0
        );
        assert_eq!(
            BufferManager::new(Strategy::Queue, 16, 10, 4, 0)
                .unwrap()
                .memory_cost(),
            0.0
        );
    }

    #[test]
    fn rejects_bad_configuration() {
        assert!(BufferManager::new(Strategy::Queue, 0, 2, 2, 0).is_err());
        assert!(BufferManager::new(
            Strategy::HpStream {
                projected_dims: Some(5)
            },
            2,
            2,
            4,
            0
        )
        .is_err());
        let mut m = BufferManager::new(Strategy::Queue, 2, 2, 1, 0).unwrap();
        assert!(m.insert(&[0.0], 2, 1).is_err());
    }
}
