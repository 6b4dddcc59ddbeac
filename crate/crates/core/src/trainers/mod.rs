//! Training strategies (plain SGD, MAML, and the two-stage CICF update)
//! plus the evaluation harness.
//!
//! Every trainer is a pure function of (config, data, initial parameters):
//! all randomness flows through named RNG streams derived from the config
//! seed (see [`crate::rng`]). The outer-batch stream is shared by all
//! strategies, so trainers that only differ in the extra work they do
//! between outer steps see identical outer batches.

mod cicf;
mod config;
mod erm;
mod evaluate;
mod maml;
mod metrics;

use std::time::Instant;

pub use cicf::{outer_gradient, outer_gradient_with, train_cicf};
pub use config::{AllocationScheme, OuterMode, OuterSampler, TaskSource, TrainConfig};
pub use erm::train_erm;
pub use evaluate::{evaluate, evaluate_by_domain, evaluate_indices, predict, EvalReport};
pub use maml::{
    build_domain_tasks, build_random_tasks, maml_task_gradient, tasks_from_config, train_maml, TaskSplit,
};
pub use metrics::{DomainEval, EpochRecord, MetricsRow, RunMetrics};

use crate::data::DomainDataset;
use crate::error::Error;
use crate::model::{ModelSpec, ParamVector};

/// Failure of a training run.
#[derive(Debug, thiserror::Error)]
pub enum TrainError {
    /// The loss went non-finite. Carries the metrics of the completed epochs.
    #[error("numeric divergence at epoch {epoch}, iteration {iteration}: {message}")]
    Diverged {
        epoch: usize,
        iteration: usize,
        message: String,
        partial: Box<RunMetrics>,
    },
    #[error(transparent)]
    Core(#[from] Error),
}

/// Shared per-epoch bookkeeping for the iterative trainers.
pub(crate) struct Harness<'a> {
    pub spec: &'a ModelSpec,
    pub train: &'a DomainDataset,
    pub test: Option<&'a DomainDataset>,
    pub seed: u64,
    started: Instant,
    epochs: Vec<EpochRecord>,
}

impl<'a> Harness<'a> {
    pub fn new(
        spec: &'a ModelSpec,
        train: &'a DomainDataset,
        test: Option<&'a DomainDataset>,
        seed: u64,
    ) -> Self {
        Harness { spec, train, test, seed, started: Instant::now(), epochs: Vec::new() }
    }

    /// Records one epoch: train accuracy plus per-domain test evaluations.
    pub fn record_epoch(&mut self, epoch: usize, train_loss: f64, params: &ParamVector) -> crate::Result<()> {
        let train_accuracy = evaluate(params, self.spec, self.train)?.accuracy;
        let test = match self.test {
            Some(test) => evaluate_by_domain(params, self.spec, test)?
                .into_iter()
                .map(|(domain, loss, accuracy)| DomainEval { domain, loss, accuracy })
                .collect(),
            None => Vec::new(),
        };
        self.epochs.push(EpochRecord { epoch, train_loss, train_accuracy, test });
        Ok(())
    }

    /// Wraps a numeric failure into `Diverged` with the metrics so far.
    pub fn diverged(&self, epoch: usize, iteration: usize, err: &Error) -> TrainError {
        TrainError::Diverged {
            epoch,
            iteration,
            message: err.to_string(),
            partial: Box::new(RunMetrics::finish(
                self.epochs.clone(),
                self.started.elapsed().as_secs_f64(),
                self.seed,
            )),
        }
    }

    pub fn finish(self) -> RunMetrics {
        RunMetrics::finish(self.epochs, self.started.elapsed().as_secs_f64(), self.seed)
    }
}

/// Iterations per epoch: enough outer batches to cover the training set.
pub(crate) fn iterations_per_epoch(train_len: usize, batch: usize) -> usize {
    train_len.div_ceil(batch)
}
