//! Mini-batch container.

use crate::error::{Error, Result};
use crate::Real;

/// A mini-batch: feature rows, class labels, and the source sample ids the
/// rows were drawn from.
///
/// Rows are kept in ascending source-id order by the samplers; gradient
/// reductions run in row order, so a batch fixes the floating-point
/// summation order.
#[derive(Debug, Clone, PartialEq)]
pub struct Batch<R: Real = crate::Scalar> {
    pub features: Vec<Vec<R>>,
    pub labels: Vec<usize>,
    pub indices: Vec<usize>,
}

impl<R: Real> Batch<R> {
    pub fn new(features: Vec<Vec<R>>, labels: Vec<usize>, indices: Vec<usize>) -> Result<Self> {
        if features.is_empty() {
            return Err(Error::data("batch must contain at least one row"));
        }
        if features.len() != labels.len() || features.len() != indices.len() {
            return Err(Error::shape(format!(
                "batch rows/labels/indices lengths differ: {}/{}/{}",
                features.len(),
                labels.len(),
                indices.len()
            )));
        }
        let dim = features[0].len();
        if features.iter().any(|row| row.len() != dim) {
            return Err(Error::shape("batch feature rows have unequal lengths"));
        }
        Ok(Batch { features, labels, indices })
    }

    /// Single-sample batch, handy for per-sample gradients.
    pub fn single(features: Vec<R>, label: usize, index: usize) -> Self {
        Batch { features: vec![features], labels: vec![label], indices: vec![index] }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.features.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    #[inline]
    pub fn feature_dim(&self) -> usize {
        self.features[0].len()
    }
}
