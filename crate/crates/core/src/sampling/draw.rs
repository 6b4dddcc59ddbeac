//! Batch construction strategies.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::clustering::ClusterAssignment;
use crate::data::DomainDataset;
use crate::error::{Error, Result};
use crate::model::Batch;
use crate::sampling::allocation::{proportional_allocation, Allocation};

/// How a mini-batch is drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplerKind {
    /// Per-cluster draws sized proportionally to cluster populations.
    StratifiedProportional,
    /// Per-cluster draws of (nearly) equal size.
    StratifiedEqual,
    /// Uniform without replacement over the whole dataset.
    Random,
    /// Class counts proportional to class sizes, uniform within class.
    ClassWeightedRandom,
}

impl SamplerKind {
    pub fn is_stratified(self) -> bool {
        matches!(self, SamplerKind::StratifiedProportional | SamplerKind::StratifiedEqual)
    }
}

/// Draws `amount` distinct values from `0..len`, ascending.
fn sample_indices<RNG: Rng>(rng: &mut RNG, len: usize, amount: usize) -> Vec<usize> {
    let mut picked = rand::seq::index::sample(rng, len, amount).into_vec();
    picked.sort_unstable();
    picked
}

/// Draws a mini-batch of `m` samples.
///
/// Stratified kinds draw `allocation.counts()[k]` samples uniformly without
/// replacement inside cluster `k`. `random` draws uniformly without
/// replacement from everything; `class_weighted_random` apportions `m` over
/// classes by largest remainder first. Batch rows are returned in ascending
/// source-id order, which fixes the gradient reduction order.
pub fn draw(
    dataset: &DomainDataset,
    assignment: Option<&ClusterAssignment>,
    kind: SamplerKind,
    allocation: Option<&Allocation>,
    m: usize,
    rng: &mut impl Rng,
) -> Result<Batch> {
    if m == 0 {
        return Err(Error::config("batch size must be >= 1"));
    }
    let indices: Vec<usize> = match kind {
        SamplerKind::StratifiedProportional | SamplerKind::StratifiedEqual => {
            let assignment =
                assignment.ok_or_else(|| Error::config("stratified draw requires a cluster assignment"))?;
            let allocation =
                allocation.ok_or_else(|| Error::config("stratified draw requires an allocation"))?;
            if allocation.cluster_count() != assignment.cluster_count() {
                return Err(Error::Allocation(format!(
                    "allocation covers {} clusters, assignment has {}",
                    allocation.cluster_count(),
                    assignment.cluster_count()
                )));
            }
            if allocation.total() != m {
                return Err(Error::Allocation(format!(
                    "allocation total {} does not match batch size {m}",
                    allocation.total()
                )));
            }
            let mut all = Vec::with_capacity(m);
            for (k, &want) in allocation.counts().iter().enumerate() {
                if want == 0 {
                    continue;
                }
                let members = assignment.members(k);
                if want > members.len() {
                    return Err(Error::Allocation(format!(
                        "cluster {k} holds {} samples, allocation wants {want}",
                        members.len()
                    )));
                }
                for pick in sample_indices(rng, members.len(), want) {
                    all.push(members[pick]);
                }
            }
            all.sort_unstable();
            all
        }
        SamplerKind::Random => {
            if m > dataset.len() {
                return Err(Error::config(format!(
                    "batch size {m} exceeds dataset size {}",
                    dataset.len()
                )));
            }
            sample_indices(rng, dataset.len(), m)
        }
        SamplerKind::ClassWeightedRandom => {
            let sizes = dataset.class_sizes();
            let per_class = proportional_allocation(&sizes, m)?;
            let mut all = Vec::with_capacity(m);
            for (class, &want) in per_class.counts().iter().enumerate() {
                if want == 0 {
                    continue;
                }
                let members = dataset.class_members(class);
                for pick in sample_indices(rng, members.len(), want) {
                    all.push(members[pick]);
                }
            }
            all.sort_unstable();
            all
        }
    };
    dataset.batch_from_indices(&indices)
}
