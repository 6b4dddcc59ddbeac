//! Hessian-vector products by central differencing of exact gradients.
//!
//! Differencing along the normalized direction keeps the step size meaningful
//! regardless of `|v|`; the result is rescaled afterwards. Accuracy is
//! O(eps²), plenty for the second-order outer updates and their tests.

use crate::error::{Error, Result};
use crate::model::batch::Batch;
use crate::model::kernel::loss_and_grad;
use crate::model::params::ParamVector;
use crate::model::spec::ModelSpec;
use crate::Real;

/// Default differencing step on the normalized direction.
pub const DEFAULT_HVP_EPS: f64 = 1e-4;

/// H·v for an arbitrary gradient function, via central differences.
///
/// `grad_fn` must return the gradient of the underlying scalar loss at the
/// given parameter point. Returns the zero vector when `v = 0`.
pub fn hvp_with<R, F>(grad_fn: F, theta: &[R], v: &[R], eps: R) -> Result<Vec<R>>
where
    R: Real,
    F: Fn(&[R]) -> Result<Vec<R>>,
{
    if eps <= R::zero() {
        return Err(Error::config(format!("hvp eps must be positive, got {eps}")));
    }
    if v.len() != theta.len() {
        return Err(Error::shape(format!(
            "direction length {} does not match parameter length {}",
            v.len(),
            theta.len()
        )));
    }
    let norm = v.iter().map(|&x| x * x).sum::<R>().sqrt();
    if norm == R::zero() {
        return Ok(vec![R::zero(); theta.len()]);
    }
    let mut plus = theta.to_vec();
    let mut minus = theta.to_vec();
    for i in 0..theta.len() {
        let unit = v[i] / norm;
        plus[i] = plus[i] + eps * unit;
        minus[i] = minus[i] - eps * unit;
    }
    let g_plus = grad_fn(&plus)?;
    let g_minus = grad_fn(&minus)?;
    if g_plus.len() != theta.len() || g_minus.len() != theta.len() {
        return Err(Error::shape("gradient function returned wrong length".to_string()));
    }
    let scale = norm / (R::from_f64_lit(2.0) * eps);
    Ok(g_plus.iter().zip(&g_minus).map(|(&p, &m)| (p - m) * scale).collect())
}

/// H·v for the batch cross-entropy loss at `params`.
pub fn hvp<R: Real>(
    params: &ParamVector<R>,
    spec: &ModelSpec,
    batch: &Batch<R>,
    v: &[R],
    eps: R,
) -> Result<Vec<R>> {
    let manifest = params.manifest().clone();
    hvp_with(
        |theta: &[R]| {
            let p = ParamVector::from_values(manifest.clone(), theta.to_vec())?;
            loss_and_grad(&p, spec, batch).map(|(_, g)| g)
        },
        params.values(),
        v,
        eps,
    )
}
