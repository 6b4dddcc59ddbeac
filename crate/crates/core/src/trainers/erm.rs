//! Plain mini-batch SGD baseline.

use crate::data::DomainDataset;
use crate::error::Error;
use crate::model::{loss_and_grad, ModelSpec, ParamVector};
use crate::rng;
use crate::sampling::{draw, SamplerKind};
use crate::trainers::{iterations_per_epoch, Harness, RunMetrics, TrainConfig, TrainError};

/// Mini-batch SGD on the cross-entropy loss with learning rate `beta`.
///
/// Batches of `outer_batch` samples come from the `outer-batch` RNG stream,
/// the same stream the two-stage trainer uses for its outer loss, so the two
/// trainers see identical batch sequences for a given seed.
pub fn train_erm(
    config: &TrainConfig,
    train: &DomainDataset,
    test: Option<&DomainDataset>,
    spec: &ModelSpec,
    init: &ParamVector,
) -> Result<(ParamVector, RunMetrics), TrainError> {
    config.validate().map_err(TrainError::Core)?;
    spec.validate().map_err(TrainError::Core)?;
    let mut params = init.clone();
    let mut outer_rng = rng::stream(config.seed, "outer-batch", 0);
    let batch_size = config.outer_batch.min(train.len());
    let iterations = iterations_per_epoch(train.len(), batch_size);
    let mut harness = Harness::new(spec, train, test, config.seed);

    for epoch in 0..config.epochs {
        let mut epoch_loss = 0.0;
        for iteration in 0..iterations {
            let batch = draw(train, None, SamplerKind::Random, None, batch_size, &mut outer_rng)
                .map_err(TrainError::Core)?;
            let (loss, grad) = match loss_and_grad(&params, spec, &batch) {
                Ok(out) => out,
                Err(e @ Error::Numeric(_)) => return Err(harness.diverged(epoch, iteration, &e)),
                Err(e) => return Err(TrainError::Core(e)),
            };
            if !loss.is_finite() {
                let e = Error::Numeric(format!("loss is {loss}"));
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
