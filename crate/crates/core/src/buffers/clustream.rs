//! CluStream micro-clusters.
//!
//! The buffer stages the first `2b` samples of its class, runs k-means
//! (`k = b`) on them, and from then on maintains exactly `b` micro-clusters.

use serde::{Deserialize, Serialize};

use super::kmeans::kmeans;
use super::nearest_index;
use crate::data::sq_dist;
use crate::rng::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CluStreamParams {
    /// Clusters whose relevance stamp is older than `t - horizon` may be evicted.
    pub horizon: f64,
    /// Absorption radius as a multiple of the cluster's RMS deviation; also
    /// scales the timestamp spread in the relevance stamp.
    pub boundary_factor: f64,
    /// Staging pool size as a multiple of the buffer capacity.
    pub init_multiplier: usize,
}

impl Default for CluStreamParams {
    fn default() -> Self {
        Self {
            horizon: 1000.0,
            boundary_factor: 2.0,
            init_multiplier: 2,
        }
    }
}

/// Cluster feature vector: count, per-dimension linear and squared sums, and
/// first/second moments of arrival times.
#[derive(Debug, Clone, PartialEq)]
pub struct MicroCluster {
    pub n: u64,
    pub linear_sum: Vec<f64>,
    pub squared_sum: Vec<f64>,
    pub timestamp_sum: f64,
    pub timestamp_sq_sum: f64,
}

impl MicroCluster {
    pub fn singleton(x: &[f64], t: f64) -> Self {
        Self {
            n: 1,
            linear_sum: x.to_vec(),
            squared_sum: x.iter().map(|v| v * v).collect(),
            timestamp_sum: t,
            timestamp_sq_sum: t * t,
        }
    }

    pub fn absorb(&mut self, x: &[f64], t: f64) {
        self.n += 1;
        for ((ls, ss), v) in self.linear_sum.iter_mut().zip(&mut self.squared_sum).zip(x) {
            *ls += v;
            *ss += v * v;
        }
        self.timestamp_sum += t;
        self.timestamp_sq_sum += t * t;
    }

    pub fn merge(&mut self, other: &MicroCluster) {
        self.n += other.n;
        for (a, b) in self.linear_sum.iter_mut().zip(&other.linear_sum) {
            *a += b;
        }
        for (a, b) in self.squared_sum.iter_mut().zip(&other.squared_sum) {
            *a += b;
        }
        self.timestamp_sum += other.timestamp_sum;
        self.timestamp_sq_sum += other.timestamp_sq_sum;
    }

    pub fn centroid(&self) -> Vec<f64> {
        let n = self.n as f64;
        self.linear_sum.iter().map(|v| v / n).collect()
    }

    /// Root-mean-square distance of the absorbed points from the centroid.
    pub fn rms_deviation(&self) -> f64 {
        let n = self.n as f64;
        self.linear_sum
            .iter()
            .zip(&self.squared_sum)
            .map(|(ls, ss)| (ss / n - (ls / n) * (ls / n)).max(0.0))
            .sum::<f64>()
            .sqrt()
    }

    /// Mean arrival time plus `factor` standard deviations.
    pub fn relevance_stamp(&self, factor: f64) -> f64 {
        let n = self.n as f64;
        let mean = self.timestamp_sum / n;
        let var = (self.timestamp_sq_sum / n - mean * mean).max(0.0);
        mean + factor * var.sqrt()
    }
}

#[derive(Debug, Clone)]
pub struct CluStreamBuffer {
    capacity: usize,
    params: CluStreamParams,
    staged: Vec<(Vec<f64>, f64)>,
    clusters: Vec<MicroCluster>,
}

/// What happened to the sample on a post-initialization insert.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CluStreamOutcome {
    Staged,
    Initialized,
    Absorbed(usize),
    /// The new singleton replaced an evicted cluster at this slot.
    Evicted(usize),
    /// Slots `(i, j)` merged into `i`; the singleton took `j`.
    Merged(usize, usize),
}

impl CluStreamBuffer {
    pub fn new(capacity: usize, params: CluStreamParams) -> Self {
        assert!(capacity >= 1 && params.init_multiplier >= 1);
        Self {
            capacity,
            params,
            staged: Vec::new(),
            clusters: Vec::new(),
        }
    }

    /// A buffer that skips staging and starts from the given clusters.
    pub fn from_clusters(
        capacity: usize,
        params: CluStreamParams,
        clusters: Vec<MicroCluster>,
    ) -> Self {
        assert!(!clusters.is_empty() && clusters.len() <= capacity);
        Self {
            capacity,
            params,
            staged: Vec::new(),
            clusters,
        }
    }

    pub fn is_initialized(&self) -> bool {
        !self.clusters.is_empty()
    }

    pub fn staged(&self) -> impl ExactSizeIterator<Item = &Vec<f64>> {
        self.staged.iter().map(|(v, _)| v)
    }

    pub fn clusters(&self) -> &[MicroCluster] {
        &self.clusters
    }

    pub fn len(&self) -> usize {
        if self.is_initialized() {
            self.clusters.len()
        } else {
            self.staged.len()
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn insert(&mut self, x: &[f64], t: f64, rng: &mut Rng) -> CluStreamOutcome {
        if !self.is_initialized() {
            self.staged.push((x.to_vec(), t));
            if self.staged.len() < self.capacity * self.params.init_multiplier {
                return CluStreamOutcome::Staged;
            }
            self.initialize(rng);
            return CluStreamOutcome::Initialized;
        }
        self.insert_online(x, t)
    }

    /// Converts the staging pool into `b` micro-clusters via seeded k-means.
    fn initialize(&mut self, rng: &mut Rng) {
        let points: Vec<Vec<f64>> = self.staged.iter().map(|(v, _)| v.clone()).collect();
        let k = self.capacity.min(points.len());
        let km = kmeans(&points, k, rng);
        let mut clusters: Vec<Option<MicroCluster>> = vec![None; k];
        for ((x, t), &c) in self.staged.iter().zip(&km.assignments) {
            match &mut clusters[c] {
                Some(mc) => mc.absorb(x, *t),
                slot @ None => *slot = Some(MicroCluster::singleton(x, *t)),
            }
        }
        self.clusters = clusters
            .into_iter()
            .map(|c| c.expect("k-means leaves no cluster empty"))
            .collect();
        self.staged = Vec::new();
    }

    fn absorption_boundary(&self, i: usize, centroids: &[Vec<f64>]) -> f64 {
        let c = &self.clusters[i];
        if c.n > 1 {
            return self.params.boundary_factor * c.rms_deviation();
        }
        // singleton: distance to the nearest other centroid
        centroids
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, other)| sq_dist(&centroids[i], other))
            .fold(f64::INFINITY, f64::min)
            .sqrt()
    }

    fn insert_online(&mut self, x: &[f64], t: f64) -> CluStreamOutcome {
        let centroids: Vec<Vec<f64>> = self.clusters.iter().map(MicroCluster::centroid).collect();
        let i = nearest_index(x, centroids.iter().map(Vec::as_slice)).unwrap();
        let dist = sq_dist(x, &centroids[i]).sqrt();
        if dist <= self.absorption_boundary(i, &centroids) {
            self.clusters[i].absorb(x, t);
            return CluStreamOutcome::Absorbed(i);
        }

        let fresh = MicroCluster::singleton(x, t);
        if self.clusters.len() < self.capacity {
            self.clusters.push(fresh);
            return CluStreamOutcome::Absorbed(self.clusters.len() - 1);
        }

        let threshold = t - self.params.horizon;
        let stale = self
            .clusters
            .iter()
            .map(|c| c.relevance_stamp(self.params.boundary_factor))
            .enumerate()
            .filter(|&(_, stamp)| stamp < threshold)
            .fold(None, |best: Option<(usize, f64)>, (j, stamp)| match best {
                Some((_, s)) if s <= stamp => best,
                _ => Some((j, stamp)),
            });
        if let Some((j, _)) = stale {
            self.clusters[j] = fresh;
            return CluStreamOutcome::Evicted(j);
        }

        if self.clusters.len() == 1 {
            self.clusters[0] = fresh;
            return CluStreamOutcome::Evicted(0);
        }
        let (a, b) = closest_pair(&centroids);
        let absorbed = std::mem::replace(&mut self.clusters[b], fresh);
        self.clusters[a].merge(&absorbed);
        CluStreamOutcome::Merged(a, b)
    }
}

fn closest_pair(points: &[Vec<f64>]) -> (usize, usize) {
    let mut best = (0, 1, f64::INFINITY);
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            let d = sq_dist(&points[i], &points[j]);
            if d < best.2 {
                best = (i, j, d);
            }
        }
    }
    (best.0, best.1)
}
