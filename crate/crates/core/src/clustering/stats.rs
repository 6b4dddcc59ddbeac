//! Per-cluster gradient statistics and the gradient-coherence diagnostic.
//!
//! These walk the full dataset (analytics only, never the training path).
//! Variances are scalar: mean squared Euclidean deviation from the mean,
//! i.e. the trace of the coordinate-wise covariance. That convention makes
//! `sigma2 / M` the standard error of a mean-gradient estimator.

use rand::Rng;

use crate::clustering::assignment::ClusterAssignment;
use crate::data::DomainDataset;
use crate::error::{Error, Result};
use crate::model::{sample_gradient, ModelSpec, ParamVector};
use crate::rng;
use crate::Scalar;

/// Population gradient statistics, global and per cluster.
#[derive(Debug, Clone)]
pub struct ClusterGradientStats {
    pub mu: Vec<Scalar>,
    pub mu_k: Vec<Vec<Scalar>>,
    pub sigma2: Scalar,
    pub sigma2_k: Vec<Scalar>,
}

impl ClusterGradientStats {
    /// Between-cluster variance `sum_k P_k |mu_k - mu|^2`.
    pub fn between_variance(&self, weights: &[Scalar]) -> Scalar {
        self.mu_k
            .iter()
            .zip(weights)
            .map(|(mk, &w)| w * sq_norm_diff(mk, &self.mu))
            .sum()
    }
}

fn sq_norm_diff(a: &[Scalar], b: &[Scalar]) -> Scalar {
    a.iter().zip(b).map(|(&x, &y)| (x - y) * (x - y)).sum()
}

/// Gradient of every sample, in dataset order.
pub fn per_sample_gradients(
    params: &ParamVector,
    spec: &ModelSpec,
    dataset: &DomainDataset,
) -> Result<Vec<Vec<Scalar>>> {
    dataset
        .samples()
        .iter()
        .map(|s| sample_gradient(params, spec, &s.features, s.label))
        .collect()
}

/// Exact statistics of a gradient population under a cluster assignment.
pub fn gradient_population_stats(
    grads: &[Vec<Scalar>],
    assignment: &ClusterAssignment,
) -> Result<ClusterGradientStats> {
    if grads.len() != assignment.sample_count() {
        return Err(Error::shape(format!(
            "{} gradients for an assignment over {} samples",
            grads.len(),
            assignment.sample_count()
        )));
    }
    let dim = grads[0].len();
    let n = grads.len();
    let k_total = assignment.cluster_count();

    let mut mu = vec![0.0; dim];
    let mut mu_k = vec![vec![0.0; dim]; k_total];
    for (i, g) in grads.iter().enumerate() {
        if g.len() != dim {
            return Err(Error::shape("gradient vectors have unequal lengths"));
        }
        for (t, &v) in mu.iter_mut().zip(g) {
            *t += v;
        }
        let k = assignment.cluster_of(i);
        for (t, &v) in mu_k[k].iter_mut().zip(g) {
            *t += v;
        }
    }
    for t in &mut mu {
        *t /= n as Scalar;
    }
    for (k, m) in mu_k.iter_mut().enumerate() {
        let size = assignment.sizes()[k] as Scalar;
        for t in m.iter_mut() {
            *t /= size;
        }
    }

    let mut sigma2 = 0.0;
    let mut sigma2_k = vec![0.0; k_total];
    for (i, g) in grads.iter().enumerate() {
        sigma2 += sq_norm_diff(g, &mu);
        let k = assignment.cluster_of(i);
        sigma2_k[k] += sq_norm_diff(g, &mu_k[k]);
    }
    sigma2 /= n as Scalar;
    for (k, s) in sigma2_k.iter_mut().enumerate() {
        *s /= assignment.sizes()[k] as Scalar;
    }

    Ok(ClusterGradientStats { mu, mu_k, sigma2, sigma2_k })
}

/// Full-traversal gradient statistics of a model on a dataset.
pub fn cluster_gradient_stats(
    params: &ParamVector,
    spec: &ModelSpec,
    dataset: &DomainDataset,
    assignment: &ClusterAssignment,
) -> Result<ClusterGradientStats> {
    let grads = per_sample_gradients(params, spec, dataset)?;
    gradient_population_stats(&grads, assignment)
}

const COHERENCE_MAX_PAIRS: usize = 64;

fn cosine(a: &[Scalar], b: &[Scalar]) -> Scalar {
    let dot: Scalar = a.iter().zip(b).map(|(&x, &y)| x * y).sum();
    let na: Scalar = a.iter().map(|&x| x * x).sum::<Scalar>().sqrt();
    let nb: Scalar = b.iter().map(|&y| y * y).sum::<Scalar>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return if na == nb { 1.0 } else { 0.0 };
    }
    dot / (na * nb)
}

/// Mean pairwise cosine similarity of per-sample gradients within each
/// cluster, estimated over at most 64 pairs per cluster. Singleton clusters
/// report 1.0.
pub fn gradient_coherence(
    params: &ParamVector,
    spec: &ModelSpec,
    dataset: &DomainDataset,
    assignment: &ClusterAssignment,
) -> Result<Vec<Scalar>> {
    let grads = per_sample_gradients(params, spec, dataset)?;
    coherence_of_gradients(&grads, assignment)
}

/// Coherence from precomputed gradients (shared by tests and diagnostics).
pub fn coherence_of_gradients(
    grads: &[Vec<Scalar>],
    assignment: &ClusterAssignment,
) -> Result<Vec<Scalar>> {
    if grads.len() != assignment.sample_count() {
        return Err(Error::shape("gradient count does not match assignment".to_string()));
    }
    let mut out = Vec::with_capacity(assignment.cluster_count());
    for k in 0..assignment.cluster_count() {
        let members = assignment.members(k);
        if members.len() < 2 {
            out.push(1.0);
            continue;
        }
        let all_pairs = members.len() * (members.len() - 1) / 2;
        let mut total = 0.0;
        let mut count = 0usize;
        if all_pairs <= COHERENCE_MAX_PAIRS {
            for (a, &i) in members.iter().enumerate() {
                for &j in &members[a + 1..] {
                    total += cosine(&grads[i], &grads[j]);
                    count += 1;
                }
            }
        } else {
            // Deterministic subsample; the diagnostic takes no seed.
            let mut rng = rng::stream(0, "coherence", k as u64);
            while count < COHERENCE_MAX_PAIRS {
                let a = rng.gen_range(0..members.len());
                let b = rng.gen_range(0..members.len());
                if a == b {
                    continue;
                }
                total += cosine(&grads[members[a]], &grads[members[b]]);
                count += 1;
            }
        }
        out.push(total / count as Scalar);
    }
    Ok(out)
}
