//! Seeded k-means (k-means++ start, Lloyd iterations), used to turn CluStream's
//! staging pool into its initial micro-clusters.

use rand::Rng;

use crate::data::sq_dist;

pub const MAX_ITERATIONS: usize = 100;
pub const SHIFT_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct KMeans {
    pub centroids: Vec<Vec<f64>>,
    /// Cluster index per input point. Every cluster has at least one member.
    pub assignments: Vec<usize>,
    pub iterations: usize,
}

fn nearest(point: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (i, c) in centroids.iter().enumerate() {
        let d = sq_dist(point, c);
        if d < best.1 {
            best = (i, d);
        }
    }
    best
}

fn plus_plus_init<R: Rng + ?Sized>(points: &[Vec<f64>], k: usize, rng: &mut R) -> Vec<Vec<f64>> {
    let mut centroids = vec![points[rng.random_range(0..points.len())].clone()];
    let mut d2: Vec<f64> = points.iter().map(|p| sq_dist(p, &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.random_range(0.0..total);
            let mut chosen = d2.iter().rposition(|&v| v > 0.0).unwrap();
            for (i, &v) in d2.iter().enumerate() {
                if v > 0.0 && target < v {
                    chosen = i;
                    break;
                }
                target -= v;
            }
            chosen
        } else {
            // every point coincides with a centroid already
            rng.random_range(0..points.len())
        };
        let c = points[pick].clone();
        for (p, v) in points.iter().zip(d2.iter_mut()) {
            *v = v.min(sq_dist(p, &c));
        }
        centroids.push(c);
    }
    centroids
}

/// Clusters `points` into `k` groups. Requires `1 <= k <= points.len()`.
///
/// Stops after [`MAX_ITERATIONS`] rounds or when no centroid moves by
/// [`SHIFT_TOLERANCE`] or more. A cluster that ends a round empty takes over
/// the point farthest from its own centroid (among clusters with at least two
/// members), so the result never has empty clusters.
pub fn kmeans<R: Rng + ?Sized>(points: &[Vec<f64>], k: usize, rng: &mut R) -> KMeans {
    assert!(k >= 1 && k <= points.len(), "k-means needs 1 <= k <= n");
    let dim = points[0].len();
    let mut centroids = plus_plus_init(points, k, rng);
    let mut assignments = vec![0; points.len()];
    let mut iterations = 0;

    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let mut dists = vec![0.0; points.len()];
        let mut sizes = vec![0usize; k];
        for (i, p) in points.iter().enumerate() {
            let (c, d) = nearest(p, &centroids);
            assignments[i] = c;
            dists[i] = d;
            sizes[c] += 1;
        }
        for empty in 0..k {
            if sizes[empty] > 0 {
                continue;
            }
            let donor = (0..points.len())
                .filter(|&i| sizes[assignments[i]] >= 2)
                .fold(None, |best: Option<usize>, i| match best {
                    Some(b) if dists[b] >= dists[i] => Some(b),
                    _ => Some(i),
                })
                .expect("n >= k guarantees a donor cluster");
            sizes[assignments[donor]] -= 1;
            assignments[donor] = empty;
            dists[donor] = 0.0;
            sizes[empty] = 1;
        }

        let mut next = vec![vec![0.0; dim]; k];
        for (p, &c) in points.iter().zip(&assignments) {
            for (s, v) in next[c].iter_mut().zip(p) {
                *s += v;
            }
        }
        for (c, size) in next.iter_mut().zip(&sizes) {
            c.iter_mut().for_each(|v| *v /= *size as f64);
        }
        let shift = centroids
            .iter()
            .zip(&next)
            .map(|(a, b)| sq_dist(a, b).sqrt())
            .fold(0.0, f64::max);
        centroids = next;
        if shift < SHIFT_TOLERANCE {
            break;
        }
    }
    KMeans {
        centroids,
        assignments,
        iterations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    #[test]
    fn recovers_duplicated_locations_exactly() {
        for seed in 0..20 {
            let locations: Vec<Vec<f64>> = (0..4)
                .map(|i| vec![i as f64 * 7.3, -(i as f64) * 1.1])
                .collect();
            let points: Vec<Vec<f64>> = locations.iter().chain(&locations).cloned().collect();
            let km = kmeans(&points, 4, &mut rng::seeded(seed, 0));
            let mut got = km.centroids.clone();
            got.sort_by(|a, b| a[0].total_cmp(&b[0]));
            assert_eq!(got, locations, "seed {seed}");
        }
    }

    #[test]
    fn single_cluster_is_mean() {
        let points = vec![vec![1.0], vec![2.0], vec![6.0]];
        let km = kmeans(&points, 1, &mut rng::seeded(0, 0));
        assert_eq!(km.centroids, vec![vec![3.0]]);
    }

    #[test]
    fn never_leaves_empty_clusters() {
        let points = vec![vec![0.0]; 6];
        let km = kmeans(&points, 3, &mut rng::seeded(5, 0));
        for c in 0..3 {
            assert!(km.assignments.contains(&c));
        }
    }

    #[test]
    fn deterministic_under_seed() {
        let mut r = rng::seeded(1, 1);
        let points: Vec<Vec<f64>> = (0..40)
            .map(|_| vec![r.random_range(0.0..1.0), r.random_range(0.0..1.0)])
            .collect();
        let a = kmeans(&points, 5, &mut rng::seeded(9, 0));
        let b = kmeans(&points, 5, &mut rng::seeded(9, 0));
        assert_eq!(a, b);
    }
}
