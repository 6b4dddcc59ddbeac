//! Empirical standard errors by repeated batch drawing, and the combined
//! analytic + Monte-Carlo report.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::clustering::{gradient_population_stats, ClusterAssignment, ClusterGradientStats};
use crate::error::{Error, Result};
use crate::intervention::se::{se_ours, se_random, SeMode};
use crate::rng;
use crate::sampling::{proportional_allocation, Allocation, SamplerKind};
use crate::Scalar;

/// A Monte-Carlo estimate with a bootstrap 95% confidence half-width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub estimate: Scalar,
    pub half_width: Scalar,
}

const BOOTSTRAP_RESAMPLES: usize = 200;

fn sq_norm_diff(a: &[Scalar], b: &[Scalar]) -> Scalar {
    a.iter().zip(b).map(|(&x, &y)| (x - y) * (x - y)).sum()
}

fn population_mean(grads: &[Vec<Scalar>]) -> Vec<Scalar> {
    let dim = grads[0].len();
    let mut mu = vec![0.0; dim];
    for g in grads {
        for (m, &v) in mu.iter_mut().zip(g) {
            *m += v;
        }
    }
    for m in &mut mu {
        *m /= grads.len() as Scalar;
    }
    mu
}

/// Index draw for one trial, uniform without replacement inside each group.
fn draw_trial_indices(
    groups: &[Vec<usize>],
    counts: &[usize],
    rng: &mut impl Rng,
) -> Vec<usize> {
    let mut out = Vec::with_capacity(counts.iter().sum());
    for (members, &want) in groups.iter().zip(counts) {
        if want == 0 {
            continue;
        }
        for pick in rand::seq::index::sample(rng, members.len(), want) {
            out.push(members[pick]);
        }
    }
    out
}

/// Empirical SE of a batch-mean gradient estimator: the mean squared
/// Euclidean deviation from the exact population mean over repeated draws.
///
/// Trials use per-trial RNG streams derived from `seed` (splitting rule in
/// [`crate::rng`]) and are reduced in trial order. Stratified draws use
/// proportional allocation.
pub fn monte_carlo_se(
    grads: &[Vec<Scalar>],
    assignment: &ClusterAssignment,
    kind: SamplerKind,
    m: usize,
    trials: u64,
    seed: u64,
) -> Result<McEstimate> {
    if trials < 100 {
        return Err(Error::config(format!("need at least 100 trials, got {trials}")));
    }
    if grads.is_empty() || grads.len() != assignment.sample_count() {
        return Err(Error::shape("gradient count does not match assignment".to_string()));
    }
    if m == 0 || m > grads.len() {
        return Err(Error::config(format!("batch size {m} invalid for population {}", grads.len())));
    }

    // Groups and per-group draw counts for the chosen sampler.
    let (groups, counts): (Vec<Vec<usize>>, Vec<usize>) = match kind {
        SamplerKind::StratifiedProportional | SamplerKind::StratifiedEqual => {
            let allocation = proportional_allocation(assignment.sizes(), m)?;
            let groups = (0..assignment.cluster_count()).map(|k| assignment.members(k)).collect();
            (groups, allocation.counts().to_vec())
        }
        SamplerKind::Random => {
            let all: Vec<usize> = (0..grads.len()).collect();
            (vec![all], vec![m])
        }
        SamplerKind::ClassWeightedRandom => {
            let class_count =
                assignment.class_of_cluster().iter().copied().max().map_or(0, |c| c + 1);
            let mut class_members = vec![Vec::new(); class_count];
            for i in 0..assignment.sample_count() {
                let class = assignment.class_of_cluster()[assignment.cluster_of(i)];
                class_members[class].push(i);
            }
            let sizes: Vec<usize> = class_members.iter().map(Vec::len).collect();
            let allocation = proportional_allocation(&sizes, m)?;
            (class_members, allocation.counts().to_vec())
        }
    };

    let mu = population_mean(grads);
    let dim = mu.len();
    let mut errors = Vec::with_capacity(trials as usize);
    for t in 0..trials {
        let mut trial_rng = rng::stream(seed, "mc-trial", t);
        let indices = draw_trial_indices(&groups, &counts, &mut trial_rng);
        let mut mean = vec![0.0; dim];
        for &i in &indices {
            for (s, &v) in mean.iter_mut().zip(&grads[i]) {
                *s += v;
            }
        }
        for s in &mut mean {
            *s /= indices.len() as Scalar;
        }
        errors.push(sq_norm_diff(&mean, &mu));
    }
    let estimate = errors.iter().sum::<Scalar>() / trials as Scalar;

    // Bootstrap the mean of the per-trial squared errors.
    let mut boot_rng = rng::stream(seed, "mc-bootstrap", 0);
    let mut means = Vec::with_capacity(BOOTSTRAP_RESAMPLES);
    for _ in 0..BOOTSTRAP_RESAMPLES {
        let mut total = 0.0;
        for _ in 0..errors.len() {
            total += errors[boot_rng.gen_range(0..errors.len())];
        }
        means.push(total / errors.len() as Scalar);
    }
    means.sort_by(|a, b| a.partial_cmp(b).expect("finite bootstrap means"));
    let lo = means[(0.025 * BOOTSTRAP_RESAMPLES as f64) as usize];
    let hi = means[(0.975 * BOOTSTRAP_RESAMPLES as f64) as usize - 1];
    Ok(McEstimate { estimate, half_width: (hi - lo) / 2.0 })
}

/// Analytic and empirical standard errors of both samplers, side by side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeReport {
    pub se_random_exact: Scalar,
    pub se_random_approx: Scalar,
    pub se_ours_exact: Scalar,
    pub se_ours_approx: Scalar,
    pub se_random_mc: McEstimate,
    pub se_ours_mc: McEstimate,
    pub trials: u64,
    pub seed: u64,
}

/// Squared bias introduced by rounding non-integral quotas: the gap between
/// the allocation-weighted cluster means and the true population mean.
pub fn allocation_rounding_bias(stats: &ClusterGradientStats, allocation: &Allocation) -> Scalar {
    let m = allocation.total() as Scalar;
    let dim = stats.mu.len();
    let mut weighted = vec![0.0; dim];
    for (mu_k, &n_k) in stats.mu_k.iter().zip(allocation.counts()) {
        for (w, &v) in weighted.iter_mut().zip(mu_k) {
            *w += n_k as Scalar / m * v;
        }
    }
    sq_norm_diff(&weighted, &stats.mu)
}

/// Builds the full report for batch size `m` with proportional allocation.
pub fn se_report(
    grads: &[Vec<Scalar>],
    assignment: &ClusterAssignment,
    m: usize,
    trials: u64,
    seed: u64,
) -> Result<SeReport> {
    let stats = gradient_population_stats(grads, assignment)?;
    let n = grads.len();
    let allocation = proportional_allocation(assignment.sizes(), m)?;
    Ok(SeReport {
        se_random_exact: se_random(stats.sigma2, m, n, SeMode::Exact)?,
        se_random_approx: se_random(stats.sigma2, m, n, SeMode::Approx)?,
        se_ours_exact: se_ours(
            assignment.weights(),
            allocation.counts(),
            assignment.sizes(),
            &stats.sigma2_k,
            SeMode::Exact,
        )?,
        se_ours_approx: se_ours(
            assignment.weights(),
            allocation.counts(),
            assignment.sizes(),
            &stats.sigma2_k,
            SeMode::Approx,
        )?,
        se_random_mc: monte_carlo_se(grads, assignment, SamplerKind::Random, m, trials, seed)?,
        se_ours_mc: monte_carlo_se(grads, assignment, SamplerKind::StratifiedProportional, m, trials, seed)?,
        trials,
        seed,
    })
}
