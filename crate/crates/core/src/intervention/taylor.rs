//! First-order expansion residual of the virtually-updated head.
//!
//! The two-stage update evaluates logits at `theta - alpha * g`. Its
//! first-order expansion around `theta` is
//! `f(theta) - alpha * (directional derivative of f along g)`.
//! The residual between the exact and expanded logits is O(alpha^2) on
//! smooth activations and zero (up to rounding) when logits are affine in
//! the parameters; both are verified by the acceptance suite.

use crate::error::{Error, Result};
use crate::model::{forward, loss_and_grad, Batch, ModelSpec, ParamVector};
use crate::Scalar;

/// Central-difference step along the normalized gradient direction.
const DIRECTIONAL_FD_EPS: Scalar = 1e-6;

/// Directional derivative of the logits at `params` along `direction`,
/// by central differences on the normalized direction.
fn logits_directional_derivative(
    params: &ParamVector,
    spec: &ModelSpec,
    x: &[Scalar],
    direction: &[Scalar],
) -> Result<Vec<Scalar>> {
    let norm = direction.iter().map(|&v| v * v).sum::<Scalar>().sqrt();
    if norm == 0.0 {
        return Ok(vec![0.0; spec.class_count()]);
    }
    let manifest = params.manifest().clone();
    let mut plus = params.values().to_vec();
    let mut minus = params.values().to_vec();
    for i in 0..plus.len() {
        let unit = direction[i] / norm;
        plus[i] += DIRECTIONAL_FD_EPS * unit;
        minus[i] -= DIRECTIONAL_FD_EPS * unit;
    }
    let (_, logits_plus) = forward(&ParamVector::from_values(manifest.clone(), plus)?, spec, x)?;
    let (_, logits_minus) = forward(&ParamVector::from_values(manifest, minus)?, spec, x)?;
    let scale = norm / (2.0 * DIRECTIONAL_FD_EPS);
    Ok(logits_plus.iter().zip(&logits_minus).map(|(&p, &m)| (p - m) * scale).collect())
}

/// Max-norm gap between the exact virtually-updated logits and their
/// first-order expansion, for one input `x`.
///
/// The update direction is the batch gradient of `batch_for_g`.
pub fn taylor_residual(
    params: &ParamVector,
    spec: &ModelSpec,
    x: &[Scalar],
    batch_for_g: &Batch,
    alpha: Scalar,
) -> Result<Scalar> {
    if alpha < 0.0 {
        return Err(Error::config(format!("alpha must be >= 0, got {alpha}")));
    }
    let (_, g) = loss_and_grad(params, spec, batch_for_g)?;

    let (_, base) = forward(params, spec, x)?;
    let updated = params.step(&g, alpha)?;
    let (_, exact) = forward(&updated, spec, x)?;
    let dir = logits_directional_derivative(params, spec, x, &g)?;

    let mut residual: Scalar = 0.0;
    for ((&e, &b), &d) in exact.iter().zip(&base).zip(&dir) {
        let linear = b - alpha * d;
        let gap = (e - linear).abs();
        if !gap.is_finite() {
            return Err(Error::Numeric("non-finite Taylor residual".to_string()));
        }
        residual = residual.max(gap);
    }
    Ok(residual)
}
