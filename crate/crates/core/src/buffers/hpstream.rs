//! HPStream: faded micro-clusters with per-cluster projected dimensions.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HpStreamParams {
    /// `λ` in the fade factor `2^(-λ·Δt)`.
    pub decay_rate: f64,
    /// `τ`: limiting radius as a multiple of the mean projected radius.
    pub spread_radius_factor: f64,
    /// Samples per unit of stream time.
    pub speed: f64,
    /// `ℓ`: dimensions selected per cluster on average.
    pub projected_dims: usize,
}

impl HpStreamParams {
    pub fn with_dims(projected_dims: usize) -> Self {
        Self {
            decay_rate: 0.5,
            spread_radius_factor: 2.0,
            speed: 200.0,
            projected_dims,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FadedCluster {
    pub weight: f64,
    pub decayed_linear_sum: Vec<f64>,
    pub decayed_squared_sum: Vec<f64>,
    /// Stream time of the last absorbed point.
    pub last_update_time: f64,
    /// Stream time the statistics are currently decayed to.
    pub faded_at: f64,
    pub bit_vector: Vec<bool>,
}

impl FadedCluster {
    pub fn singleton(x: &[f64], t: f64) -> Self {
        Self {
            weight: 1.0,
            decayed_linear_sum: x.to_vec(),
            decayed_squared_sum: x.iter().map(|v| v * v).collect(),
            last_update_time: t,
            faded_at: t,
            bit_vector: vec![false; x.len()],
        }
    }

    /// Decays the statistics from `faded_at` to `t`.
    pub fn fade_to(&mut self, t: f64, decay_rate: f64) {
        let factor = fade_factor(decay_rate, t - self.faded_at);
        if factor != 1.0 {
            self.weight *= factor;
            self.decayed_linear_sum
                .iter_mut()
                .for_each(|v| *v *= factor);
            self.decayed_squared_sum
                .iter_mut()
                .for_each(|v| *v *= factor);
        }
        self.faded_at = t;
    }

    pub fn absorb(&mut self, x: &[f64], t: f64) {
        self.weight += 1.0;
        for ((ls, ss), v) in self
            .decayed_linear_sum
            .iter_mut()
            .zip(&mut self.decayed_squared_sum)
            .zip(x)
        {
            *ls += v;
            *ss += v * v;
        }
        self.last_update_time = t;
    }

    pub fn centroid(&self) -> Vec<f64> {
        self.decayed_linear_sum
            .iter()
            .map(|v| v / self.weight)
            .collect()
    }

    /// Per-dimension radius `sqrt(max(0, SS/W - (LS/W)²))`. Clusters with
    /// weight at most 1 report radius 0 on every dimension.
    pub fn radii(&self) -> Vec<f64> {
        let w = self.weight;
        if w <= 1.0 {
            return vec![0.0; self.decayed_linear_sum.len()];
        }
        self.decayed_linear_sum
            .iter()
            .zip(&self.decayed_squared_sum)
            .map(|(ls, ss)| (ss / w - (ls / w) * (ls / w)).max(0.0).sqrt())
            .collect()
    }

    /// Root of the mean squared difference over selected dimensions.
    pub fn projected_distance(&self, x: &[f64]) -> f64 {
        let (sum, bits) = self
            .bit_vector
            .iter()
            .zip(x.iter().zip(&self.decayed_linear_sum))
            .filter(|(&on, _)| on)
            .fold((0.0, 0usize), |(s, n), (_, (v, ls))| {
                let diff = v - ls / self.weight;
                (s + diff * diff, n + 1)
            });
        (sum / bits.max(1) as f64).sqrt()
    }

    /// `τ` times the mean radius over selected dimensions.
    pub fn limiting_radius(&self, spread_radius_factor: f64) -> f64 {
        let radii = self.radii();
        let (sum, bits) = radii
            .iter()
            .zip(&self.bit_vector)
            .filter(|(_, &on)| on)
            .fold((0.0, 0usize), |(s, n), (r, _)| (s + r, n + 1));
        spread_radius_factor * sum / bits.max(1) as f64
    }
}

pub fn fade_factor(decay_rate: f64, elapsed: f64) -> f64 {
    (-decay_rate * elapsed).exp2()
}

/// Chooses projected dimensions from a `k × d` radius table.
///
/// The `k·ℓ` (cluster, dimension) pairs with the smallest radius are selected,
/// ties broken by cluster index then dimension index. A cluster left without
/// any selected dimension gets its single smallest-radius dimension.
pub fn select_dimensions(radii: &[Vec<f64>], projected_dims: usize) -> Vec<Vec<bool>> {
    let k = radii.len();
    let d = radii.first().map_or(0, Vec::len);
    let mut bits = vec![vec![false; d]; k];
    let budget = (k * projected_dims).min(k * d);
    let mut pairs: Vec<(f64, usize, usize)> = radii
        .iter()
        .enumerate()
        .flat_map(|(c, row)| row.iter().enumerate().map(move |(j, &r)| (r, c, j)))
        .collect();
    let key = |a: &(f64, usize, usize), b: &(f64, usize, usize)| {
        a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2))
    };
    if budget > 0 && budget < pairs.len() {
        pairs.select_nth_unstable_by(budget - 1, key);
    }
    for &(_, c, j) in pairs.iter().take(budget) {
        bits[c][j] = true;
    }
    for (row, b) in radii.iter().zip(bits.iter_mut()) {
        if d > 0 && !b.contains(&true) {
            let best = (0..d).fold(0, |best, j| if row[j] < row[best] { j } else { best });
            b[best] = true;
        }
    }
    bits
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HpStreamOutcome {
    Stored,
    Absorbed(usize),
    Replaced(usize),
}

#[derive(Debug, Clone)]
pub struct HpStreamBuffer {
    capacity: usize,
    params: HpStreamParams,
    clusters: Vec<FadedCluster>,
}

impl HpStreamBuffer {
    pub fn new(capacity: usize, params: HpStreamParams) -> Self {
        assert!(capacity >= 1);
        assert!(
            params.decay_rate >= 0.0 && params.spread_radius_factor > 0.0 && params.speed > 0.0
        );
        assert!(params.projected_dims >= 1);
        Self {
            capacity,
            params,
            clusters: Vec::with_capacity(capacity),
        }
    }

    pub fn from_clusters(
        capacity: usize,
        params: HpStreamParams,
        clusters: Vec<FadedCluster>,
    ) -> Self {
        let mut buf = Self::new(capacity, params);
        assert!(clusters.len() <= capacity);
        buf.clusters = clusters;
        buf
    }

    pub fn params(&self) -> &HpStreamParams {
        &self.params
    }

    pub fn clusters(&self) -> &[FadedCluster] {
        &self.clusters
    }

    pub fn len(&self) -> usize {
        self.clusters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }

    pub fn assign_dimensions(&mut self) {
        let radii: Vec<Vec<f64>> = self.clusters.iter().map(FadedCluster::radii).collect();
        let bits = select_dimensions(&radii, self.params.projected_dims);
        for (c, b) in self.clusters.iter_mut().zip(bits) {
            c.bit_vector = b;
        }
    }

    /// `sample_index` is the position in the stream; stream time is
    /// `sample_index / speed`.
    pub fn insert(&mut self, x: &[f64], sample_index: u64) -> HpStreamOutcome {
        let t = sample_index as f64 / self.params.speed;
        if self.clusters.len() < self.capacity {
            self.clusters.push(FadedCluster::singleton(x, t));
            return HpStreamOutcome::Stored;
        }
        for c in &mut self.clusters {
            c.fade_to(t, self.params.decay_rate);
        }
        self.assign_dimensions();

        let mut nearest = (0, f64::INFINITY);
        for (i, c) in self.clusters.iter().enumerate() {
            let d = c.projected_distance(x);
            if d < nearest.1 {
                nearest = (i, d);
            }
        }
        let (i, dist) = nearest;
        if dist <= self.clusters[i].limiting_radius(self.params.spread_radius_factor) {
            self.clusters[i].absorb(x, t);
            return HpStreamOutcome::Absorbed(i);
        }
        let oldest = (0..self.clusters.len()).fold(0, |best, j| {
            if self.clusters[j].last_update_time < self.clusters[best].last_update_time {
                j
            } else {
                best
            }
        });
        self.clusters[oldest] = FadedCluster::singleton(x, t);
        HpStreamOutcome::Replaced(oldest)
    }
}
