//! Per-run training metrics.

use serde::{Deserialize, Serialize};

use crate::Scalar;

/// Loss/accuracy of one evaluation split restricted to one domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DomainEval {
    pub domain: usize,
    pub loss: Scalar,
    pub accuracy: Scalar,
}

/// One epoch's record: mean iteration loss, train accuracy at epoch end, and
/// per-domain test evaluations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: Scalar,
    pub train_accuracy: Scalar,
    pub test: Vec<DomainEval>,
}

/// Full metrics of one training run.
///
/// `wall_clock_seconds` is observational and excluded from any determinism
/// contract; everything else is a pure function of (config, data, init).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunMetrics {
    pub epochs: Vec<EpochRecord>,
    /// Unweighted mean of the final epoch's per-domain test accuracies.
    pub final_test_accuracy: Option<Scalar>,
    pub wall_clock_seconds: f64,
    pub seed: u64,
}

/// One CSV row of the metrics stream: epoch, split, domain, loss, accuracy.
/// Train rows carry the pseudo-domain `"all"`.
#[derive(Debug, Clone, Serialize)]
pub struct MetricsRow {
    pub epoch: usize,
    pub split: &'static str,
    pub domain: String,
    pub loss: Scalar,
    pub accuracy: Scalar,
}

impl RunMetrics {
    pub(crate) fn finish(epochs: Vec<EpochRecord>, wall_clock_seconds: f64, seed: u64) -> Self {
        let final_test_accuracy = epochs.last().and_then(|e| {
            if e.test.is_empty() {
                None
            } else {
                Some(e.test.iter().map(|d| d.accuracy).sum::<Scalar>() / e.test.len() as Scalar)
            }
        });
        RunMetrics { epochs, final_test_accuracy, wall_clock_seconds, seed }
    }

    /// Flattens the run into CSV rows, epoch order, train before test.
    pub fn rows(&self) -> Vec<MetricsRow> {
        let mut out = Vec::new();
        for e in &self.epochs {
            out.push(MetricsRow {
                epoch: e.epoch,
                split: "train",
                domain: "all".to_string(),
                loss: e.train_loss,
                accuracy: e.train_accuracy,
            });
            for d in &e.test {
                out.push(MetricsRow {
                    epoch: e.epoch,
                    split: "test",
                    domain: d.domain.to_string(),
                    loss: d.loss,
                    accuracy: d.accuracy,
                });
            }
        }
        out
    }

    /// Deterministic payload, for equality checks that must ignore timing.
    pub fn deterministic_view(&self) -> (&[EpochRecord], Option<Scalar>, u64) {
        (&self.epochs, self.final_test_accuracy, self.seed)
    }
}
