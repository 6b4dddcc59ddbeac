//! Flat parameter vector with its layout manifest.

use rand::Rng;

use crate::error::{Error, Result};
use crate::model::spec::{Manifest, ModelSpec};
use crate::rng;
use crate::Real;

/// All network parameters as one flat vector, plus the manifest describing
/// which slice belongs to which layer.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamVector<R: Real = crate::Scalar> {
    values: Vec<R>,
    manifest: Manifest,
}

impl<R: Real> ParamVector<R> {
    /// Wraps an existing flat vector, checking length and finiteness.
    pub fn from_values(manifest: Manifest, values: Vec<R>) -> Result<Self> {
        if values.len() != manifest.total_len() {
            return Err(Error::shape(format!(
                "parameter vector has {} values, manifest expects {}",
                values.len(),
                manifest.total_len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Numeric(format!("non-finite parameter at index {pos}")));
        }
        Ok(ParamVector { values, manifest })
    }

    pub fn zeros(spec: &ModelSpec) -> Self {
        let manifest = spec.manifest();
        let values = vec![R::zero(); manifest.total_len()];
        ParamVector { values, manifest }
    }

    #[inline]
    pub fn values(&self) -> &[R] {
        &self.values
    }

    #[inline]
    pub fn values_mut(&mut self) -> &mut [R] {
        &mut self.values
    }

    #[inline]
    pub fn manifest(&self) -> &Manifest {
        &self.manifest
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Weight slice of layer `l`, row-major `rows × cols`.
    pub fn weights(&self, l: usize) -> &[R] {
        let (w, _) = self.manifest.layer_ranges(l);
        &self.values[w]
    }

    /// Bias slice of layer `l`.
    pub fn biases(&self, l: usize) -> &[R] {
        let (_, b) = self.manifest.layer_ranges(l);
        &self.values[b]
    }

    /// Returns `self - lr * grad` without touching `self`.
    pub fn step(&self, grad: &[R], lr: R) -> Result<Self> {
        if grad.len() != self.values.len() {
            return Err(Error::shape(format!(
                "gradient length {} does not match parameter length {}",
                grad.len(),
                self.values.len()
            )));
        }
        let values = self.values.iter().zip(grad).map(|(&p, &g)| p - lr * g).collect();
        Ok(ParamVector { values, manifest: self.manifest.clone() })
    }

    /// In-place SGD update.
    pub fn step_in_place(&mut self, grad: &[R], lr: R) -> Result<()> {
        if grad.len() != self.values.len() {
            return Err(Error::shape("gradient/parameter length mismatch".to_string()));
        }
        for (p, &g) in self.values.iter_mut().zip(grad) {
            *p = *p - lr * g;
        }
        Ok(())
    }
}

/// Seed-deterministic initialization: weights uniform in
/// `[-1/sqrt(fan_in), 1/sqrt(fan_in))`, biases zero.
pub fn init_params<R: Real>(spec: &ModelSpec, seed: u64) -> Result<ParamVector<R>> {
    spec.validate()?;
    let manifest = spec.manifest();
    let mut values = vec![R::zero(); manifest.total_len()];
    let mut rng = rng::stream(seed, "init", 0);
    for (l, dims) in manifest.layers().iter().enumerate() {
        let bound = 1.0 / (dims.cols as f64).sqrt();
        let (w, _) = manifest.layer_ranges(l);
        for slot in &mut values[w] {
            let u: f64 = rng.gen();
            *slot = R::from_f64_lit(bound * (2.0 * u - 1.0));
        }
        // biases stay zero
    }
    ParamVector::from_values(manifest, values)
}
