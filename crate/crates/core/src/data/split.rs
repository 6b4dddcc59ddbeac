//! Leave-one-domain-out splitting with train-statistics normalization.

use crate::data::dataset::{DomainDataset, NormStats};
use crate::error::{Error, Result};

/// Splits off `test_domain`, normalizes both splits with statistics computed
/// on the training split only, and records those statistics on both.
///
/// Constant features (train std below 1e-12) are centered but not scaled.
pub fn leave_one_domain_out(
    dataset: &DomainDataset,
    test_domain: usize,
) -> Result<(DomainDataset, DomainDataset)> {
    if !dataset.domains_present().contains(&test_domain) {
        return Err(Error::config(format!(
            "test domain {test_domain} not present (available: {:?})",
            dataset.domains_present()
        )));
    }
    let mut train_samples = Vec::new();
    let mut test_samples = Vec::new();
    for s in dataset.samples() {
        if s.domain == test_domain {
            test_samples.push(s.clone());
        } else {
            train_samples.push(s.clone());
        }
    }
    if train_samples.is_empty() {
        return Err(Error::config("leave-one-domain-out would leave an empty training split"));
    }

    let dim = dataset.feature_dim();
    let n = train_samples.len() as f64;
    let mut mean = vec![0.0; dim];
    for s in &train_samples {
        for (m, &v) in mean.iter_mut().zip(&s.features) {
            *m += v;
        }
    }
    for m in &mut mean {
        *m /= n;
    }
    let mut var = vec![0.0; dim];
    for s in &train_samples {
        for ((v, &x), &m) in var.iter_mut().zip(&s.features).zip(&mean) {
            let d = x - m;
            *v += d * d;
        }
    }
    let std: Vec<f64> = var.iter().map(|v| (v / n).sqrt()).collect();
    let stats = NormStats { mean, std };

    let apply = |samples: Vec<crate::data::dataset::Sample>| {
        let mut samples = samples;
        for s in &mut samples {
            for (i, f) in s.features.iter_mut().enumerate() {
                *f -= stats.mean[i];
                if stats.std[i] > 1e-12 {
                    *f /= stats.std[i];
                }
            }
        }
        samples
    };

    let mut train =
        DomainDataset::new(apply(train_samples), dataset.class_count(), dataset.domain_count())?;
    let mut test =
        DomainDataset::new(apply(test_samples), dataset.class_count(), dataset.domain_count())?;
    train.set_normalization(stats.clone());
    test.set_normalization(stats);
    Ok((train, test))
}
