//! Training configuration shared by all strategies.

use serde::{Deserialize, Serialize};

use crate::clustering::ClusterSpace;
use crate::error::{Error, Result};
use crate::intervention::VirtualScope;
use crate::Scalar;

/// How the outer gradient treats the dependence of the virtual update on the
/// current parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OuterMode {
    /// Treat the global gradient as a constant: gradient at the lookahead point.
    FirstOrder,
    /// Chain rule through the lookahead, with a Hessian-vector correction.
    ExactHvp,
}

/// How per-cluster draw counts for the global batch are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AllocationScheme {
    /// Proportional to cluster size (pairs with a uniform outer batch).
    Proportional,
    /// Equal per cluster (pairs with a per-cluster outer batch).
    Equal,
}

/// How the outer-loss batch is drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OuterSampler {
    /// Uniform without replacement over the training data.
    Uniform,
    /// Equal counts from every cluster.
    PerCluster,
}

/// How MAML builds its task pools.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskSource {
    /// One task per source domain (uses domain labels).
    PerDomain,
    /// Random equal-size pools, ignoring domain labels.
    Random,
}

/// Hyperparameters for a single training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    /// Inner (virtual-update) learning rate.
    pub alpha: Scalar,
    /// Outer learning rate.
    pub beta: Scalar,
    pub epochs: usize,
    /// Batch size for the global-scope gradient estimate.
    pub global_batch: usize,
    /// Batch size for the outer loss (and for plain SGD baselines).
    pub outer_batch: usize,
    /// Clusters per class.
    pub clusters_per_class: usize,
    pub outer_mode: OuterMode,
    pub allocation: AllocationScheme,
    pub outer_sampler: OuterSampler,
    pub virtual_scope: VirtualScope,
    pub cluster_space: ClusterSpace,
    pub hvp_eps: Scalar,
    pub maml_tasks: TaskSource,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            alpha: 0.05,
            beta: 0.01,
            epochs: 30,
            global_batch: 256,
            outer_batch: 84,
            clusters_per_class: 3,
            outer_mode: OuterMode::FirstOrder,
            allocation: AllocationScheme::Proportional,
            outer_sampler: OuterSampler::Uniform,
            virtual_scope: VirtualScope::FullVector,
            cluster_space: ClusterSpace::RawInput,
            hvp_eps: crate::model::DEFAULT_HVP_EPS,
            maml_tasks: TaskSource::PerDomain,
            seed: 0,
        }
    }
}

impl TrainConfig {
    /// Checks the numeric invariants. `beta = 0` is tolerated so frozen-model
    /// ablations stay expressible.
    pub fn validate(&self) -> Result<()> {
        if self.alpha < 0.0 {
            return Err(Error::config(format!("alpha must be >= 0, got {}", self.alpha)));
        }
        if self.beta < 0.0 {
            return Err(Error::config(format!("beta must be >= 0, got {}", self.beta)));
        }
        if self.epochs == 0 {
            return Err(Error::config("epochs must be >= 1"));
        }
        if self.global_batch == 0 || self.outer_batch == 0 {
            return Err(Error::config("batch sizes must be >= 1"));
        }
        if self.clusters_per_class == 0 {
            return Err(Error::config("clusters_per_class must be >= 1"));
        }
        if self.hvp_eps <= 0.0 {
            return Err(Error::config("hvp_eps must be positive"));
        }
        Ok(())
    }
}
