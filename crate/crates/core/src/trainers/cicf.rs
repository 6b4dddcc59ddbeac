//! Two-stage causal-feature training: estimate the global-scope gradient
//! from a stratified batch, take a virtual step with it, and descend the
//! outer loss evaluated at the lookahead point.

use crate::clustering::{cluster_per_class, ClusterSpace};
use crate::data::DomainDataset;
use crate::error::{Error, Result};
use crate::intervention::{global_gradient, virtual_update_scoped, GradientEstimate, VirtualScope};
use crate::model::{hvp, hvp_with, loss_and_grad, Batch, ModelSpec, ParamVector};
use crate::rng;
use crate::sampling::{draw, equal_allocation, proportional_allocation, SamplerKind};
use crate::trainers::{
    iterations_per_epoch, AllocationScheme, Harness, OuterMode, OuterSampler, RunMetrics,
    TrainConfig, TrainError,
};
use crate::Scalar;

/// Outer gradient from arbitrary gradient oracles.
///
/// `grad_global` drives the virtual update `theta - alpha * grad_global(theta)`;
/// `grad_outer` is the loss gradient evaluated at that lookahead point.
/// `FirstOrder` returns it as is; `ExactHvp` applies the chain rule through
/// the lookahead, differencing `grad_global` for the Hessian term.
pub fn outer_gradient_with<G, W>(
    grad_global: G,
    grad_outer: W,
    theta: &[Scalar],
    alpha: Scalar,
    mode: OuterMode,
    hvp_eps: Scalar,
) -> Result<Vec<Scalar>>
where
    G: Fn(&[Scalar]) -> Result<Vec<Scalar>>,
    W: Fn(&[Scalar]) -> Result<Vec<Scalar>>,
{
    let g = grad_global(theta)?;
    if g.len() != theta.len() {
        return Err(Error::shape("global gradient length mismatch".to_string()));
    }
    let lookahead: Vec<Scalar> = theta.iter().zip(&g).map(|(&t, &gi)| t - alpha * gi).collect();
    let w = grad_outer(&lookahead)?;
    match mode {
        OuterMode::FirstOrder => Ok(w),
        OuterMode::ExactHvp => {
            if alpha == 0.0 {
                return Ok(w);
            }
            let hw = hvp_with(&grad_global, theta, &w, hvp_eps)?;
            Ok(w.iter().zip(&hw).map(|(&wi, &hi)| wi - alpha * hi).collect())
        }
    }
}

/// Outer loss at the lookahead point and its gradient w.r.t. the *current*
/// parameters, shared by the public op and the training loop.
fn outer_loss_and_gradient(
    params: &ParamVector,
    spec: &ModelSpec,
    dataset: &DomainDataset,
    estimate: &GradientEstimate,
    outer_batch: &Batch,
    mode: OuterMode,
    scope: VirtualScope,
    hvp_eps: Scalar,
) -> Result<(Scalar, Vec<Scalar>)> {
    let lookahead = virtual_update_scoped(params, estimate, scope, Some(spec))?;
    let (loss, w) = loss_and_grad(&lookahead, spec, outer_batch)?;
    let grad = match mode {
        OuterMode::FirstOrder => w,
        OuterMode::ExactHvp => {
            if estimate.alpha == 0.0 {
                w
            } else {
                // d(lookahead)/d(theta) = I - alpha * P * H, so the pullback of w
                // is w - alpha * H * (P w) with P selecting the updated slice.
                let masked = match scope {
                    VirtualScope::FullVector => w.clone(),
                    VirtualScope::HeadOnly => {
                        let mut m = vec![0.0; w.len()];
                        let range = spec.head_param_range();
                        m[range.clone()].copy_from_slice(&w[range]);
                        m
                    }
                };
                let global_batch = dataset.batch_from_indices(&estimate.batch_indices)?;
                let hv = hvp(params, spec, &global_batch, &masked, hvp_eps)?;
                w.iter().zip(&hv).map(|(&wi, &hi)| wi - estimate.alpha * hi).collect()
            }
        }
    };
    Ok((loss, grad))
}

/// Gradient of the outer loss w.r.t. the current parameters.
///
/// `estimate` must carry the batch indices of the stratified draw that
/// produced it; `ExactHvp` re-uses that batch for the Hessian term.
pub fn outer_gradient(
    params: &ParamVector,
    spec: &ModelSpec,
    dataset: &DomainDataset,
    estimate: &GradientEstimate,
    outer_batch: &Batch,
    mode: OuterMode,
    scope: VirtualScope,
    hvp_eps: Scalar,
) -> Result<Vec<Scalar>> {
    outer_loss_and_gradient(params, spec, dataset, estimate, outer_batch, mode, scope, hvp_eps)
        .map(|(_, g)| g)
}

/// Two-stage training. Clustering happens once, up front; every iteration
/// draws a fresh stratified batch for the global gradient (stream
/// `global-batch`) and an outer batch (stream `outer-batch`).
///
/// With `alpha = 0` the lookahead is the identity and the parameter
/// trajectory coincides bitwise with [`super::train_erm`] under the same
/// seed and a uniform outer sampler.
pub fn train_cicf(
    config: &TrainConfig,
    train: &DomainDataset,
    test: Option<&DomainDataset>,
    spec: &ModelSpec,
    init: &ParamVector,
) -> std::result::Result<(ParamVector, RunMetrics), TrainError> {
    config.validate().map_err(TrainError::Core)?;
    spec.validate().map_err(TrainError::Core)?;

    let encoder = match config.cluster_space {
        ClusterSpace::RawInput => None,
        ClusterSpace::EncoderOutput => Some((init, spec)),
    };
    let assignment =
        cluster_per_class(train, config.clusters_per_class, config.cluster_space, encoder, config.seed)
            .map_err(TrainError::Core)?;

    let m_global = config.global_batch.min(train.len());
    let (kind, allocation) = match config.allocation {
        AllocationScheme::Proportional => (
            SamplerKind::StratifiedProportional,
            proportional_allocation(assignment.sizes(), m_global).map_err(TrainError::Core)?,
        ),
        AllocationScheme::Equal => (
            SamplerKind::StratifiedEqual,
            equal_allocation(assignment.cluster_count(), m_global).map_err(TrainError::Core)?,
        ),
    };
    let m_outer = config.outer_batch.min(train.len());
    let outer_allocation = match config.outer_sampler {
        OuterSampler::Uniform => None,
        OuterSampler::PerCluster => {
            Some(equal_allocation(assignment.cluster_count(), m_outer).map_err(TrainError::Core)?)
        }
    };

    let mut params = init.clone();
    let mut global_rng = rng::stream(config.seed, "global-batch", 0);
    let mut outer_rng = rng::stream(config.seed, "outer-batch", 0);
    let iterations = iterations_per_epoch(train.len(), m_outer);
    let mut harness = Harness::new(spec, train, test, config.seed);

    for epoch in 0..config.epochs {
        let mut epoch_loss = 0.0;
        for iteration in 0..iterations {
            let step = (|| -> Result<(Scalar, Vec<Scalar>)> {
                let estimate = global_gradient(
                    &params,
                    spec,
                    train,
                    &assignment,
                    &allocation,
                    kind,
                    config.alpha,
                    &mut global_rng,
                )?;
                let outer_batch = match config.outer_sampler {
                    OuterSampler::Uniform => {
                        draw(train, None, SamplerKind::Random, None, m_outer, &mut outer_rng)?
                    }
                    OuterSampler::PerCluster => draw(
                        train,
                        Some(&assignment),
                        SamplerKind::StratifiedEqual,
                        outer_allocation.as_ref(),
                        m_outer,
                        &mut outer_rng,
                    )?,
                };
                outer_loss_and_gradient(
                    &params,
                    spec,
                    train,
                    &estimate,
                    &outer_batch,
                    config.outer_mode,
                    config.virtual_scope,
                    config.hvp_eps,
                )
            })();
            let (loss, grad) = match step {
                Ok(out) => out,
                Err(e @ Error::Numeric(_)) => return Err(harness.diverged(epoch, iteration, &e)),
                Err(e) => return Err(TrainError::Core(e)),
            };
            if !loss.is_finite() {
                let e = Error::Numeric(format!("outer loss is {loss}"));
                return Err(harness.diverged(epoch, iteration, &e));
            }
            params.step_in_place(&grad, config.beta).map_err(TrainError::Core)?;
            epoch_loss += loss;
        }
        harness
            .record_epoch(epoch, epoch_loss / iterations as f64, &params)
            .map_err(TrainError::Core)?;
    }
    Ok((params, harness.finish()))
}
