//! Lloyd's algorithm with k-means++ seeding.

use rand::Rng;

use crate::error::{Error, Result};
use crate::rng;
use crate::Real;

/// Outcome of a k-means run. `inertia_history` records the inertia after
/// every assignment step; Lloyd's algorithm keeps it non-increasing.
#[derive(Debug, Clone)]
pub struct KmeansResult<R: Real = crate::Scalar> {
    pub labels: Vec<usize>,
    pub centroids: Vec<Vec<R>>,
    pub inertia: R,
    pub iterations: usize,
    pub inertia_history: Vec<R>,
}

fn sq_dist<R: Real>(a: &[R], b: &[R]) -> R {
    a.iter().zip(b).map(|(&x, &y)| (x - y) * (x - y)).sum()
}

/// k-means++ seeding: first centroid uniform, later centroids sampled with
/// probability proportional to the squared distance to the nearest chosen one.
fn seed_centroids<R: Real, RNG: Rng>(points: &[Vec<R>], k: usize, rng: &mut RNG) -> Vec<Vec<R>> {
    let n = points.len();
    let mut centroids: Vec<Vec<R>> = Vec::with_capacity(k);
    centroids.push(points[rng.gen_range(0..n)].clone());
    let mut min_d2: Vec<R> = points.iter().map(|p| sq_dist(p, &centroids[0])).collect();
    while centroids.len() < k {
        let total: R = min_d2.iter().cloned().sum();
        let next = if total > R::zero() {
            let mut target = R::from_f64_lit(rng.gen::<f64>()) * total;
            let mut chosen = n - 1;
            for (i, &d) in min_d2.iter().enumerate() {
                if target < d {
                    chosen = i;
                    break;
                }
                target = target - d;
            }
            chosen
        } else {
            // All remaining points coincide with a centroid.
            rng.gen_range(0..n)
        };
        let c = points[next].clone();
        for (d, p) in min_d2.iter_mut().zip(points) {
            let nd = sq_dist(p, &c);
            if nd < *d {
                *d = nd;
            }
        }
        centroids.push(c);
    }
    centroids
}

/// Nearest-centroid assignment (ties to the lower index), followed by the
/// empty-cluster repair: each empty cluster takes over the point farthest
/// from its assigned centroid. Stealing a point zeroes its contribution, so
/// the repair never increases inertia.
fn assign_with_repair<R: Real>(points: &[Vec<R>], centroids: &mut [Vec<R>]) -> (Vec<usize>, R) {
    let k = centroids.len();
    let mut labels = vec![0usize; points.len()];
    let mut dists = vec![R::zero(); points.len()];
    let mut counts = vec![0usize; k];
    let mut inertia = R::zero();
    for (i, p) in points.iter().enumerate() {
        let mut best = R::infinity();
        let mut best_k = 0;
        for (c, centroid) in centroids.iter().enumerate() {
            let d = sq_dist(p, centroid);
            if d < best {
                best = d;
                best_k = c;
            }
        }
        labels[i] = best_k;
        dists[i] = best;
        counts[best_k] += 1;
        inertia = inertia + best;
    }
    for c in 0..k {
        if counts[c] == 0 {
            let mut far_i = usize::MAX;
            let mut far_d = R::neg_infinity();
            for i in 0..points.len() {
                // Leave singletons alone so a steal cannot empty another cluster.
                if counts[labels[i]] <= 1 {
                    continue;
                }
                if dists[i] > far_d {
                    far_d = dists[i];
                    far_i = i;
                }
            }
            debug_assert!(far_i != usize::MAX, "k <= points implies a donor exists");
            counts[labels[far_i]] -= 1;
            inertia = inertia - dists[far_i];
            labels[far_i] = c;
            dists[far_i] = R::zero();
            counts[c] = 1;
            centroids[c] = points[far_i].clone();
        }
    }
    (labels, inertia)
}

/// Runs k-means on `points`.
///
/// Stops when the largest centroid shift drops below `tol` or after
/// `max_iter` iterations. Every cluster in the result is nonempty.
pub fn kmeans<R: Real>(
    points: &[Vec<R>],
    k: usize,
    seed: u64,
    max_iter: usize,
    tol: R,
) -> Result<KmeansResult<R>> {
    if points.is_empty() {
        return Err(Error::config("kmeans needs at least one point"));
    }
    if k == 0 {
        return Err(Error::config("kmeans needs k >= 1"));
    }
    if k > points.len() {
        return Err(Error::config(format!("k = {k} exceeds point count {}", points.len())));
    }
    let dim = points[0].len();
    if points.iter().any(|p| p.len() != dim) {
        return Err(Error::shape("kmeans points have unequal dimensions"));
    }

    let mut rng = rng::stream(seed, "kmeans", 0);
    let mut centroids = seed_centroids(points, k, &mut rng);
    let mut history = Vec::new();
    let mut iterations = 0;

    loop {
        let (labels, inertia) = assign_with_repair(points, &mut centroids);
        history.push(inertia);
        iterations += 1;

        let mut new_centroids = vec![vec![R::zero(); dim]; k];
        let mut counts = vec![0usize; k];
        for (p, &lab) in points.iter().zip(&labels) {
            counts[lab] += 1;
            for (s, &v) in new_centroids[lab].iter_mut().zip(p) {
                *s = *s + v;
            }
        }
        for c in 0..k {
            let denom = R::from_count(counts[c]);
            for t in &mut new_centroids[c] {
                *t = *t / denom;
            }
        }

        let shift = centroids
            .iter()
            .zip(&new_centroids)
            .map(|(a, b)| sq_dist(a, b).sqrt())
            .fold(R::zero(), R::max);
        centroids = new_centroids;
        if shift < tol || iterations >= max_iter {
            let (labels, inertia) = assign_with_repair(points, &mut centroids);
            history.push(inertia);
            return Ok(KmeansResult { labels, centroids, inertia, iterations, inertia_history: history });
        }
    }
}
