//! Global-scope gradient estimation and the virtual parameter update.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::clustering::ClusterAssignment;
use crate::data::DomainDataset;
use crate::error::{Error, Result};
use crate::model::{loss_and_grad, ModelSpec, ParamVector};
use crate::sampling::{draw, Allocation, SamplerKind};
use crate::Scalar;

/// Which parameter slice a virtual update touches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VirtualScope {
    /// Update encoder and head together (default).
    FullVector,
    /// Update only the head's slice, leaving the encoder frozen.
    HeadOnly,
}

/// A gradient estimate with its provenance: how the batch was drawn, which
/// samples went in, and the inner learning rate it will be applied with.
#[derive(Debug, Clone)]
pub struct GradientEstimate {
    pub g: Vec<Scalar>,
    pub sampler: SamplerKind,
    pub batch_indices: Vec<usize>,
    pub allocation: Option<Allocation>,
    pub alpha: Scalar,
}

/// Estimates the population-mean gradient from one stratified batch.
///
/// The batch mean over the `M` drawn samples is exactly the `1/M`-weighted
/// sum over clusters, so this delegates to `loss_and_grad` on the drawn
/// batch. With a single cluster and `M = N` the result equals the full-batch
/// gradient bit for bit (the draw returns samples in dataset order).
pub fn global_gradient(
    params: &ParamVector,
    spec: &ModelSpec,
    dataset: &DomainDataset,
    assignment: &ClusterAssignment,
    allocation: &Allocation,
    kind: SamplerKind,
    alpha: Scalar,
    rng: &mut impl Rng,
) -> Result<GradientEstimate> {
    if !kind.is_stratified() {
        return Err(Error::config("global gradient estimation uses a stratified sampler"));
    }
    let batch = draw(dataset, Some(assignment), kind, Some(allocation), allocation.total(), rng)?;
    let (_, g) = loss_and_grad(params, spec, &batch)?;
    Ok(GradientEstimate {
        g,
        sampler: kind,
        batch_indices: batch.indices,
        allocation: Some(allocation.clone()),
        alpha,
    })
}

/// Returns `theta - alpha * g` without modifying `theta`.
///
/// `alpha = 0` returns a bitwise copy.
pub fn virtual_update(theta: &ParamVector, estimate: &GradientEstimate) -> Result<ParamVector> {
    virtual_update_scoped(theta, estimate, VirtualScope::FullVector, None)
}

/// Virtual update restricted to `scope`. `HeadOnly` needs the model spec to
/// locate the head slice.
pub fn virtual_update_scoped(
    theta: &ParamVector,
    estimate: &GradientEstimate,
    scope: VirtualScope,
    spec: Option<&ModelSpec>,
) -> Result<ParamVector> {
    if estimate.g.len() != theta.len() {
        return Err(Error::shape(format!(
            "gradient length {} does not match parameter length {}",
            estimate.g.len(),
            theta.len()
        )));
    }
    if estimate.alpha == 0.0 {
        return Ok(theta.clone());
    }
    match scope {
        VirtualScope::FullVector => theta.step(&estimate.g, estimate.alpha),
        VirtualScope::HeadOnly => {
            let spec = spec.ok_or_else(|| Error::config("head-only virtual update needs the model spec"))?;
            let range = spec.head_param_range();
            let mut out = theta.clone();
            for i in range {
                out.values_mut()[i] = theta.values()[i] - estimate.alpha * estimate.g[i];
            }
            Ok(out)
        }
    }
}
