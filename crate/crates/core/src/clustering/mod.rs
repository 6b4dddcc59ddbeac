//! Per-class k-means clustering and per-cluster gradient statistics.

mod assignment;
mod kmeans;
mod stats;

pub use assignment::{
    cluster_per_class, ClusterAssignment, ClusterSpace, DEFAULT_KMEANS_MAX_ITER, DEFAULT_KMEANS_TOL,
};
pub use kmeans::{kmeans, KmeansResult};
pub use stats::{
    cluster_gradient_stats, coherence_of_gradients, gradient_coherence, gradient_population_stats,
    per_sample_gradients, ClusterGradientStats,
};
