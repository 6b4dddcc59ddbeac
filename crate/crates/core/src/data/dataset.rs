//! Labeled multi-domain dataset.

use crate::error::{Error, Result};
use crate::model::Batch;
use crate::Scalar;

/// One labeled sample with its domain tag.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub features: Vec<Scalar>,
    pub label: usize,
    pub domain: usize,
}

/// Per-feature normalization statistics, always computed on a training split.
#[derive(Debug, Clone, PartialEq)]
pub struct NormStats {
    pub mean: Vec<Scalar>,
    pub std: Vec<Scalar>,
}

/// Immutable collection of labeled, domain-tagged samples.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainDataset {
    samples: Vec<Sample>,
    feature_dim: usize,
    class_count: usize,
    domain_count: usize,
    normalization: Option<NormStats>,
}

impl DomainDataset {
    pub fn new(samples: Vec<Sample>, class_count: usize, domain_count: usize) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::data("dataset must contain at least one sample"));
        }
        let feature_dim = samples[0].features.len();
        for (i, s) in samples.iter().enumerate() {
            if s.features.len() != feature_dim {
                return Err(Error::data(format!(
                    "sample {i} has {} features, expected {feature_dim}",
                    s.features.len()
                )));
            }
            if s.label >= class_count {
                return Err(Error::data(format!("sample {i} has label {} >= class count {class_count}", s.label)));
            }
            if s.domain >= domain_count {
                return Err(Error::data(format!("sample {i} has domain {} >= domain count {domain_count}", s.domain)));
            }
        }
        Ok(DomainDataset { samples, feature_dim, class_count, domain_count, normalization: None })
    }

    /// Builds a dataset inferring class and domain counts from the samples.
    pub fn from_samples(samples: Vec<Sample>) -> Result<Self> {
        let class_count = samples.iter().map(|s| s.label).max().map_or(0, |m| m + 1);
        let domain_count = samples.iter().map(|s| s.domain).max().map_or(0, |m| m + 1);
        DomainDataset::new(samples, class_count, domain_count)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    #[inline]
    pub fn feature_dim(&self) -> usize {
        self.feature_dim
    }

    #[inline]
    pub fn class_count(&self) -> usize {
        self.class_count
    }

    #[inline]
    pub fn domain_count(&self) -> usize {
        self.domain_count
    }

    #[inline]
    pub fn sample(&self, i: usize) -> &Sample {
        &self.samples[i]
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn normalization(&self) -> Option<&NormStats> {
        self.normalization.as_ref()
    }

    pub(crate) fn set_normalization(&mut self, stats: NormStats) {
        self.normalization = Some(stats);
    }

    /// Sample ids belonging to class `c`, in dataset order.
    pub fn class_members(&self, c: usize) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.samples[i].label == c).collect()
    }

    pub fn class_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0usize; self.class_count];
        for s in &self.samples {
            sizes[s.label] += 1;
        }
        sizes
    }

    /// Domain ids actually present, ascending.
    pub fn domains_present(&self) -> Vec<usize> {
        let mut seen = vec![false; self.domain_count];
        for s in &self.samples {
            seen[s.domain] = true;
        }
        (0..self.domain_count).filter(|&d| seen[d]).collect()
    }

    /// Sample ids belonging to domain `d`, in dataset order.
    pub fn domain_members(&self, d: usize) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.samples[i].domain == d).collect()
    }

    /// Assembles a batch from sample ids, in the given order.
    pub fn batch_from_indices(&self, indices: &[usize]) -> Result<Batch> {
        if indices.is_empty() {
            return Err(Error::data("cannot build an empty batch"));
        }
        let mut features = Vec::with_capacity(indices.len());
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            let s = self.samples.get(i).ok_or_else(|| {
                Error::data(format!("sample id {i} out of range for dataset of {}", self.len()))
            })?;
            features.push(s.features.clone());
            labels.push(s.label);
        }
        Batch::new(features, labels, indices.to_vec())
    }

    /// The whole dataset as one batch, in dataset order.
    pub fn full_batch(&self) -> Batch {
        let indices: Vec<usize> = (0..self.len()).collect();
        self.batch_from_indices(&indices).expect("dataset is nonempty")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> DomainDataset {
        DomainDataset::from_samples(vec![
            Sample { features: vec![0.0, 1.0], label: 0, domain: 0 },
            Sample { features: vec![1.0, 0.0], label: 1, domain: 1 },
            Sample { features: vec![0.5, 0.5], label: 0, domain: 1 },
        ])
        .unwrap()
    }

    #[test]
    fn rejects_empty_and_ragged() {
        assert!(DomainDataset::from_samples(vec![]).is_err());
        let ragged = vec![
            Sample { features: vec![0.0], label: 0, domain: 0 },
            Sample { features: vec![0.0, 1.0], label: 0, domain: 0 },
        ];
        assert!(DomainDataset::from_samples(ragged).is_err());
    }

    #[test]
    fn membership_queries() {
        let d = toy();
        assert_eq!(d.class_members(0), vec![0, 2]);
        assert_eq!(d.class_sizes(), vec![2, 1]);
        assert_eq!(d.domain_members(1), vec![1, 2]);
        assert_eq!(d.domains_present(), vec![0, 1]);
    }

    #[test]
    fn batch_preserves_order_and_indices() {
        let d = toy();
        let b = d.batch_from_indices(&[2, 0]).unwrap();
        assert_eq!(b.indices, vec![2, 0]);
        assert_eq!(b.labels, vec![0, 0]);
        assert_eq!(b.features[0], vec![0.5, 0.5]);
    }
}
