//! MAML: per-task inner updates, outer loss on held-back task data.

use rand::Rng;

use crate::data::DomainDataset;
use crate::error::{Error, Result};
use crate::model::{hvp, loss_and_grad, Batch, ModelSpec, ParamVector};
use crate::rng;
use crate::trainers::{
    iterations_per_epoch, Harness, OuterMode, RunMetrics, TaskSource, TrainConfig, TrainError,
};
use crate::Scalar;

/// A task: the sample pool its meta-train and meta-test batches are drawn
/// from each iteration. Batches from the same pool are kept disjoint.
#[derive(Debug, Clone)]
pub struct TaskSplit {
    pub id: usize,
    pub pool: Vec<usize>,
}

/// One task per domain present in the dataset.
pub fn build_domain_tasks(data: &DomainDataset) -> Vec<TaskSplit> {
    data.domains_present()
        .into_iter()
        .enumerate()
        .map(|(id, d)| TaskSplit { id, pool: data.domain_members(d) })
        .collect()
}

/// `count` random equal-size pools, ignoring domain labels.
pub fn build_random_tasks(data: &DomainDataset, count: usize, seed: u64) -> Result<Vec<TaskSplit>> {
    if count == 0 || count > data.len() {
        return Err(Error::config(format!("cannot split {} samples into {count} tasks", data.len())));
    }
    let mut rng = rng::stream(seed, "maml-tasks", 0);
    let mut order: Vec<usize> = (0..data.len()).collect();
    for i in (1..order.len()).rev() {
        order.swap(i, rng.gen_range(0..=i));
    }
    let mut tasks: Vec<TaskSplit> = (0..count).map(|id| TaskSplit { id, pool: Vec::new() }).collect();
    for (i, sample) in order.into_iter().enumerate() {
        tasks[i % count].pool.push(sample);
    }
    for t in &mut tasks {
        t.pool.sort_unstable();
    }
    Ok(tasks)
}

/// One task's contribution to the outer update: the meta-test loss after a
/// virtual inner step on the meta-train batch, and its gradient.
///
/// `FirstOrder` returns the gradient at the adapted parameters; `ExactHvp`
/// pulls it back through the inner step with a Hessian-vector term on the
/// meta-train batch.
pub fn maml_task_gradient(
    params: &ParamVector,
    spec: &ModelSpec,
    meta_train: &Batch,
    meta_test: &Batch,
    alpha: Scalar,
    mode: OuterMode,
    hvp_eps: Scalar,
) -> Result<(Scalar, Vec<Scalar>)> {
    let (_, g_train) = loss_and_grad(params, spec, meta_train)?;
    let adapted = if alpha == 0.0 { params.clone() } else { params.step(&g_train, alpha)? };
    let (loss, w) = loss_and_grad(&adapted, spec, meta_test)?;
    let grad = match mode {
        OuterMode::FirstOrder => w,
        OuterMode::ExactHvp => {
            if alpha == 0.0 {
                w
            } else {
                let hv = hvp(params, spec, meta_train, &w, hvp_eps)?;
                w.iter().zip(&hv).map(|(&wi, &hi)| wi - alpha * hi).collect()
            }
        }
    };
    Ok((loss, grad))
}

/// Draws disjoint meta-train / meta-test batches from one pool.
fn draw_task_batches(
    data: &DomainDataset,
    pool: &[usize],
    batch: usize,
    rng: &mut impl Rng,
) -> Result<(Batch, Batch)> {
    let per_side = batch.min(pool.len() / 2).max(1);
    if pool.len() < 2 {
        return Err(Error::data(format!("task pool of {} samples cannot split", pool.len())));
    }
    let picked = rand::seq::index::sample(rng, pool.len(), 2 * per_side);
    let mut train_ids: Vec<usize> = picked.iter().take(per_side).map(|i| pool[i]).collect();
    let mut test_ids: Vec<usize> = picked.iter().skip(per_side).map(|i| pool[i]).collect();
    train_ids.sort_unstable();
    test_ids.sort_unstable();
    Ok((data.batch_from_indices(&train_ids)?, data.batch_from_indices(&test_ids)?))
}

/// MAML training over the given tasks. The outer update sums task gradients.
pub fn train_maml(
    config: &TrainConfig,
    tasks: &[TaskSplit],
    train: &DomainDataset,
    test: Option<&DomainDataset>,
    spec: &ModelSpec,
    init: &ParamVector,
) -> std::result::Result<(ParamVector, RunMetrics), TrainError> {
    config.validate().map_err(TrainError::Core)?;
    spec.validate().map_err(TrainError::Core)?;
    if tasks.is_empty() {
        return Err(TrainError::Core(Error::config("MAML needs at least one task")));
    }
    let mut params = init.clone();
    let mut batch_rng = rng::stream(config.seed, "outer-batch", 0);
    let iterations = iterations_per_epoch(train.len(), config.outer_batch.min(train.len()));
    let mut harness = Harness::new(spec, train, test, config.seed);

    for epoch in 0..config.epochs {
        let mut epoch_loss = 0.0;
        for iteration in 0..iterations {
            let step = (|| -> Result<(Scalar, Vec<Scalar>)> {
                let mut total_loss = 0.0;
                let mut total_grad = vec![0.0; params.len()];
                for task in tasks {
                    let (meta_train, meta_test) =
                        draw_task_batches(train, &task.pool, config.outer_batch, &mut batch_rng)?;
                    let (loss, grad) = maml_task_gradient(
                        &params,
                        spec,
                        &meta_train,
                        &meta_test,
                        config.alpha,
                        config.outer_mode,
                        config.hvp_eps,
                    )?;
                    total_loss += loss;
                    for (t, g) in total_grad.iter_mut().zip(&grad) {
                        *t += g;
                    }
                }
                Ok((total_loss / tasks.len() as Scalar, total_grad))
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

/// Builds tasks per the config's task source.
pub fn tasks_from_config(config: &TrainConfig, data: &DomainDataset) -> Result<Vec<TaskSplit>> {
    match config.maml_tasks {
        TaskSource::PerDomain => Ok(build_domain_tasks(data)),
        TaskSource::Random => {
            let count = data.domains_present().len().max(1);
            build_random_tasks(data, count, config.seed)
        }
    }
}
