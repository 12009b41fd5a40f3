//! Brute-force reference implementations of single buffer updates, written
//! directly from the update rules and sharing no code with the library.

#![allow(dead_code, clippy::needless_range_loop)]

/// `(vector, count)` pairs.
pub type State = Vec<(Vec<f64>, u64)>;

fn sq(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for k in 0..a.len() {
        let d = a[k] - b[k];
        s += d * d;
    }
    s
}

/// ExStream: append while there is room, otherwise merge the closest pair
/// `(i, j)` into `i` as a count-weighted mean and put `x` in slot `j`.
pub fn exstream_step(state: &State, capacity: usize, x: &[f64]) -> State {
    let mut next = state.clone();
    if next.len() < capacity {
        next.push((x.to_vec(), 1));
        return next;
    }
    if capacity == 1 {
        let (w, c) = &next[0];
        let merged = (0..x.len())
            .map(|k| (*c as f64 * w[k] + x[k]) / (*c as f64 + 1.0))
            .collect();
        next[0] = (merged, c + 1);
        return next;
    }
    let mut best = (0, 1, f64::INFINITY);
    for i in 0..next.len() {
        for j in i + 1..next.len() {
            let d = sq(&next[i].0, &next[j].0);
            if d < best.2 {
                best = (i, j, d);
            }
        }
    }
    let (i, j, _) = best;
    let (wi, ci) = next[i].clone();
    let (wj, cj) = next[j].clone();
    let (fi, fj) = (ci as f64, cj as f64);
    let merged = (0..wi.len())
        .map(|k| (fi * wi[k] + fj * wj[k]) / (fi + fj))
        .collect();
    next[i] = (merged, ci + cj);
    next[j] = (x.to_vec(), 1);
    next
}

/// Online k-means: append while there is room, otherwise move the nearest
/// exemplar (lowest index on ties) toward `x` by `1/(c+1)`.
pub fn online_kmeans_step(state: &State, capacity: usize, x: &[f64]) -> State {
    let mut next = state.clone();
    if next.len() < capacity {
        next.push((x.to_vec(), 1));
        return next;
    }
    let mut best = (0, f64::INFINITY);
    for (i, (w, _)) in next.iter().enumerate() {
        let d = sq(w, x);
        if d < best.1 {
            best = (i, d);
        }
    }
    let (w, c) = &next[best.0];
    let f = *c as f64;
    let moved = (0..x.len())
        .map(|k| (f * w[k] + x[k]) / (f + 1.0))
        .collect();
    next[best.0] = (moved, c + 1);
    next
}

/// Queue: drop the oldest sample when full.
pub fn queue_step(state: &[Vec<f64>], capacity: usize, x: &[f64]) -> Vec<Vec<f64>> {
    let mut next = state.to_vec();
    if next.len() == capacity {
        next.remove(0);
    }
    next.push(x.to_vec());
    next
}

/// Bit vectors by full sort of all (radius, cluster, dim) triples; any cluster
/// left empty gets its smallest-radius dimension (first on ties).
pub fn hpstream_bits(radii: &[Vec<f64>], projected_dims: usize) -> Vec<Vec<bool>> {
    let k = radii.len();
    let d = radii[0].len();
    let mut all = Vec::new();
    for c in 0..k {
        for j in 0..d {
            all.push((radii[c][j], c, j));
        }
    }
    all.sort_by(|a, b| {
        a.0.partial_cmp(&b.0)
            .unwrap()
            .then(a.1.cmp(&b.1))
            .then(a.2.cmp(&b.2))
    });
    let mut bits = vec![vec![false; d]; k];
    for &(_, c, j) in all.iter().take(k * projected_dims) {
        bits[c][j] = true;
    }
    for c in 0..k {
        if !bits[c].iter().any(|&b| b) {
            let mut m = 0;
            for j in 1..d {
                if radii[c][j] < radii[c][m] {
                    m = j;
                }
            }
            bits[c][m] = true;
        }
    }
    bits
}

pub fn states_match(a: &State, b: &State, tol: f64) -> bool {
    a.len() == b.len()
        && a.iter().zip(b).all(|((va, ca), (vb, cb))| {
            ca == cb && va.len() == vb.len() && va.iter().zip(vb).all(|(x, y)| (x - y).abs() <= tol)
        })
}

/// Simple deterministic generator so instance generation does not depend on
/// the library's RNG plumbing.
pub struct SplitMix(pub u64);

impl SplitMix {
    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    pub fn below(&mut self, n: u64) -> u64 {
        self.next_u64() % n
    }

    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    /// Half the time small integers (to exercise exact ties), otherwise
    /// uniform in [-5, 5).
    pub fn vector(&mut self, d: usize, grid: bool) -> Vec<f64> {
        (0..d)
            .map(|_| {
                if grid {
                    self.below(5) as f64 - 2.0
                } else {
                    self.unit() * 10.0 - 5.0
                }
            })
            .collect()
    }
}
